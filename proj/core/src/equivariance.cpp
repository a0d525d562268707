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

#include "flowrnn/equivariance.hpp"

#include <algorithm>

#include "flowrnn/errors.hpp"
#include "flowrnn/group_signal.hpp"

namespace flowrnn {

std::string to_string(FlowMapping m) {
  switch (m) {
    case FlowMapping::trivial_lift: return "trivial_lift";
    case FlowMapping::nontrivial_lift: return "nontrivial_lift";
    case FlowMapping::frame: return "frame";
    case FlowMapping::invariance: return "invariance";
  }
  return "?";
}

FlowMapping parse_flow_mapping(const std::string& s) {
  for (FlowMapping m : {FlowMapping::trivial_lift, FlowMapping::nontrivial_lift,
                        FlowMapping::frame, FlowMapping::invariance}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown flow mapping '" + s + "'");
}

FlowMapping natural_mapping(const Model& m) {
  if (m.family == ModelFamily::grnn) return FlowMapping::frame;
  return m.core.lift_mode == LiftMode::trivial ? FlowMapping::trivial_lift
                                               : FlowMapping::nontrivial_lift;
}

std::vector<double> flow_residual_curve(const Model& m, const SpaceTimeSignal& f,
                                        const FlowGenerator& nu_hat, FlowMapping mapping) {
  const auto base = hidden_trajectory(m, f);
  const auto moved = hidden_trajectory(m, apply_flow_to_sequence(f, nu_hat));
  const FlowSet& v = *m.core.flow_set;
  const bool shifts_v =
      mapping == FlowMapping::trivial_lift || mapping == FlowMapping::nontrivial_lift;
  const bool acts_on_g = mapping == FlowMapping::trivial_lift || mapping == FlowMapping::frame;

  std::vector<double> curve;
  curve.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto t = static_cast<std::int64_t>(i) + 1;
    const GroupElement g = flow_element(nu_hat, t - 1);
    double worst = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
      std::size_t src = n;
      if (shifts_v) {
        auto j = shift_index(v, v[n], nu_hat, Truncation::drop);
        if (!j) continue;
        src = *j;
      }
      const GroupSignal expected = acts_on_g ? act(g, base[i][src]) : base[i][src];
      worst = std::max(worst, max_abs_diff(moved[i][n], expected));
    }
    curve.push_back(worst);
  }
  return curve;
}

std::vector<double> static_residual_curve(const Model& m, const SpaceTimeSignal& f,
                                          const GroupElement& g) {
  SpaceTimeSignal shifted;
  for (std::size_t t = 0; t < f.length(); ++t) shifted.push_back(act(g, f[t]));
  const auto base = hidden_trajectory(m, f);
  const auto moved = hidden_trajectory(m, shifted);
  std::vector<double> curve;
  for (std::size_t i = 0; i < base.size(); ++i) {
    curve.push_back(max_abs_diff(moved[i], act(g, base[i])));
  }
  return curve;
}

}  // namespace flowrnn
