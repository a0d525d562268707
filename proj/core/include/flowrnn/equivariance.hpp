// Copyright 2026 The flowrnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWRNN_EQUIVARIANCE_HPP_
#define FLOWRNN_EQUIVARIANCE_HPP_

#include <string>
#include <vector>

#include "flowrnn/grid_signal.hpp"
#include "flowrnn/group_flow.hpp"
#include "flowrnn/rnn.hpp"

namespace flowrnn {

/// How h_t[f] should transform when the input is replaced by ψ(ν̂)·f.
///
///   trivial_lift     h'_t(ν) = ψ_{t-1}(ν̂)·h_t(ν − ν̂)   (interior ν only)
///   nontrivial_lift  h'_t(ν) = h_t(ν − ν̂)               (interior ν only)
///   frame            h'_t(ν) = ψ_{t-1}(ν̂)·h_t(ν)
///   invariance       h'_t(ν) = h_t(ν)
enum class FlowMapping { trivial_lift, nontrivial_lift, frame, invariance };

std::string to_string(FlowMapping m);
FlowMapping parse_flow_mapping(const std::string& s);

/// The mapping a model is expected to satisfy: the lift-specific one for a
/// FERNN, `frame` for a G-RNN.
FlowMapping natural_mapping(const Model& m);

/// Max abs residual between h_t[ψ(ν̂)·f] and the mapped h_t[f], for
/// t = 1..T. Element t-1 of the result belongs to h_t.
std::vector<double> flow_residual_curve(const Model& m, const SpaceTimeSignal& f,
                                        const FlowGenerator& nu_hat, FlowMapping mapping);

/// Max abs residual between h_t[g·f] and g·h_t[f] for one fixed g.
std::vector<double> static_residual_curve(const Model& m, const SpaceTimeSignal& f,
                                          const GroupElement& g);

}  // namespace flowrnn

#endif  // FLOWRNN_EQUIVARIANCE_HPP_
