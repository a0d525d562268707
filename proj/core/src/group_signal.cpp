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

#include "flowrnn/group_signal.hpp"

#include <algorithm>
#include <cmath>

#include "flowrnn/errors.hpp"
#include "spatial.hpp"

namespace flowrnn {

GroupSignal::GroupSignal(Grid grid, int rotations, int channels)
    : grid_(grid), rotations_(rotations), channels_(channels),
      values_(static_cast<std::size_t>(rotations) * static_cast<std::size_t>(channels) *
                  grid.cells(),
              0.0) {
  if (rotations != 1 && rotations != 4) throw InvalidArgument("rotation axis must be 1 or 4");
  if (channels < 1) throw InvalidArgument("group signal needs at least one channel");
  if (rotations == 4 && !grid.is_square()) {
    throw NonSquareGrid("roto-translation states need a square grid");
  }
}

GroupSignal::GroupSignal(Grid grid, int rotations, int channels, std::vector<double> values)
    : GroupSignal(grid, rotations, channels) {
  if (values.size() != values_.size()) throw ShapeMismatch("group signal value count mismatch");
  values_ = std::move(values);
}

Signal GroupSignal::flatten() const {
  return Signal(grid_, rotations_ * channels_, values_);
}

GroupSignal GroupSignal::from_signal(const Signal& s) {
  std::vector<double> v(s.values().begin(), s.values().end());
  return GroupSignal(s.grid(), 1, s.channels(), std::move(v));
}

GroupSignal act(const GroupElement& g, const GroupSignal& h) {
  if (g.rotation != 0 && h.rotations() != 4) {
    throw ShapeMismatch("rotation acting on a translation-group state");
  }
  const auto source = detail::pullback_map(h.grid(), g);
  GroupSignal out(h.grid(), h.rotations(), h.channels());
  const std::size_t cells = h.grid().cells();
  for (int r = 0; r < h.rotations(); ++r) {
    const int src_r = static_cast<int>(wrap_index(r - g.rotation, h.rotations()));
    for (int k = 0; k < h.channels(); ++k) {
      auto src = h.plane(src_r, k);
      auto dst = out.plane(r, k);
      for (std::size_t i = 0; i < cells; ++i) dst[i] = src[source[i]];
    }
  }
  return out;
}

double max_abs_diff(const GroupSignal& a, const GroupSignal& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("max_abs_diff on differently shaped states");
  double m = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

void add_inplace(GroupSignal& acc, const GroupSignal& other, double scale) {
  if (!acc.same_shape(other)) throw ShapeMismatch("add on differently shaped states");
  auto a = acc.values();
  auto b = other.values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
}

LiftedState::LiftedState(std::shared_ptr<const FlowSet> v, GroupSignal zero_slice)
    : flow_set(std::move(v)) {
  if (!flow_set) throw InvalidArgument("lifted state needs a flow set");
  slices.assign(flow_set->size(), std::move(zero_slice));
}

LiftedState zero_lifted_state(std::shared_ptr<const FlowSet> v, Grid grid, int rotations,
                              int channels) {
  return LiftedState(std::move(v), GroupSignal(grid, rotations, channels));
}

LiftedState act(const GroupElement& g, const LiftedState& h) {
  LiftedState out;
  out.flow_set = h.flow_set;
  out.slices.reserve(h.size());
  for (const auto& s : h.slices) out.slices.push_back(act(g, s));
  return out;
}

LiftedState shift_v(const LiftedState& h, const FlowGenerator& nu_hat, Truncation mode) {
  const FlowSet& v = *h.flow_set;
  LiftedState out;
  out.flow_set = h.flow_set;
  out.slices.reserve(h.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (auto j = shift_index(v, v[i], nu_hat, mode)) {
      out.slices.push_back(h.slices[*j]);
    } else {
      const auto& s = h.slices[i];
      out.slices.emplace_back(s.grid(), s.rotations(), s.channels());
    }
  }
  return out;
}

double max_abs_diff(const LiftedState& a, const LiftedState& b) {
  if (a.size() != b.size()) throw FlowSetMismatch("lifted states have different V sizes");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

}  // namespace flowrnn
