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

#ifndef FLOWRNN_RNN_HPP_
#define FLOWRNN_RNN_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowrnn/conv.hpp"
#include "flowrnn/grid_signal.hpp"
#include "flowrnn/group_flow.hpp"
#include "flowrnn/group_signal.hpp"

namespace flowrnn {

enum class Nonlinearity { relu, tanh, identity };
enum class LiftMode { trivial, nontrivial };
enum class ModelFamily { grnn, fernn };

/// Which flow is undone on each V slice before pooling for the decoder.
///
/// For a hidden state h_s (after consuming frames 0..s-1):
///   current   trivial lift: h_s(ν)            nontrivial: ψ_{s-1}(ν)·h_s(ν)
///   advanced  trivial lift: ψ_1(ν)·h_s(ν)     nontrivial: ψ_s(ν)·h_s(ν)
/// With `advanced`, decoded predictions of frame s move with the input flow
/// exactly as frame s does; with `current` they lag one step behind.
enum class Readout { current, advanced };

std::string to_string(Nonlinearity s);
std::string to_string(LiftMode m);
std::string to_string(ModelFamily f);
std::string to_string(Readout r);
Nonlinearity parse_nonlinearity(const std::string& s);
LiftMode parse_lift_mode(const std::string& s);
ModelFamily parse_model_family(const std::string& s);
Readout parse_readout(const std::string& s);

double activate(Nonlinearity s, double x);
/// Derivative expressed through the activated value y = σ(x).
double activate_grad_from_output(Nonlinearity s, double y);
void activate_inplace(Nonlinearity s, GroupSignal& h);

struct GRNNParams {
  Kernel input;      ///< lifting kernel, rotations == 1
  Kernel recurrent;  ///< group kernel, rotations == rotation_slots(group)
  Nonlinearity sigma = Nonlinearity::relu;
  GroupKind group = GroupKind::translation;
};

struct FERNNParams {
  Kernel input;
  VKernel recurrent;
  std::shared_ptr<const FlowSet> flow_set;
  Nonlinearity sigma = Nonlinearity::relu;
  LiftMode lift_mode = LiftMode::trivial;
  GroupKind group = GroupKind::translation;
  Truncation truncation = Truncation::drop;
};

/// A G-RNN viewed as a FERNN over the singleton set {0}; both produce the
/// same numbers.
FERNNParams as_fernn(const GRNNParams& p);

/// Cyclic conv stack on the flattened pooled state, relu between layers.
struct DecoderParams {
  std::vector<Kernel> layers;
};

Signal decode(const DecoderParams& d, const Signal& x);

/// h_{t+1} = σ(h_t ⋆ W + f_t ⋆̂ U).
GroupSignal grnn_step(const GroupSignal& h, const Signal& f, const GRNNParams& p);

/// h_{t+1}(ν) = σ(ψ_1(ν)·[h_t ⋆ W](ν) + [f_t ⋆̂ U](ν)). `t` is only read by
/// the nontrivial lift.
LiftedState fernn_step(const LiftedState& h, const Signal& f, const FERNNParams& p,
                       std::int64_t t);

/// h_{t+1}(ν) = σ([h_t ⋆ W](ν) + [ψ_t(ν)⁻¹·f_t ⋆̂ U](ν)), no roll.
LiftedState fernn_step_nontrivial(const LiftedState& h, const Signal& f, const FERNNParams& p,
                                  std::int64_t t);

/// Elementwise max over V. `argmax`, if given, receives the winning slice per
/// entry (ties go to the lowest V index).
GroupSignal pool_over_v(const LiftedState& h, std::vector<std::uint32_t>* argmax = nullptr);

struct Model {
  ModelFamily family = ModelFamily::fernn;
  FERNNParams core;
  DecoderParams decoder;
  Readout readout = Readout::advanced;

  int data_channels() const { return core.input.in_channels(); }
  int hidden_channels() const { return core.input.out_channels(); }
  int rotations() const { return rotation_slots(core.group); }

  /// Mutable views of every trainable tensor in a fixed order: input kernel,
  /// recurrent base, v_profile (if any), decoder layers.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
};

/// Blueprint for building and initializing a model.
struct ModelSpec {
  ModelFamily family = ModelFamily::fernn;
  std::shared_ptr<const FlowSet> flow_set;  ///< ignored for grnn
  GroupKind group = GroupKind::translation;
  int data_channels = 1;
  int hidden_channels = 8;
  int kernel_size = 3;
  std::vector<int> decoder_hidden = {8};
  int decoder_kernel_size = 3;
  Nonlinearity sigma = Nonlinearity::relu;
  LiftMode lift_mode = LiftMode::trivial;
  Readout readout = Readout::advanced;
  bool full_profile = false;
  Truncation truncation = Truncation::drop;
  double recurrent_gain = 0.5;
};

/// Uniform fan-in scaled initialization, deterministic in `seed`.
Model init_model(const ModelSpec& spec, std::uint64_t seed);

/// Applies one recurrence step of the model's core, whatever its family.
LiftedState model_step(const Model& m, const LiftedState& h, const Signal& f, std::int64_t t);

LiftedState zero_state(const Model& m, const Grid& grid);

/// The per-slice transform used by the readout for hidden state h_s.
GroupElement readout_element(const Model& m, const FlowGenerator& nu, std::int64_t s);

/// Decoder prediction of frame s from the hidden state h_s.
Signal predict_frame(const Model& m, const LiftedState& h, std::int64_t s);

enum class RolloutMode { teacher_forced, autoregressive };

/// Predictions of frames warmup .. warmup+horizon-1. Teacher forcing needs
/// warmup+horizon-1 input frames; autoregression needs warmup.
SpaceTimeSignal rollout(const Model& m, const SpaceTimeSignal& f, int warmup, int horizon,
                        RolloutMode mode);

/// Hidden states h_1..h_T produced by feeding every frame of f.
std::vector<LiftedState> hidden_trajectory(const Model& m, const SpaceTimeSignal& f);

}  // namespace flowrnn

#endif  // FLOWRNN_RNN_HPP_
