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

#ifndef FLOWRNN_GROUP_SIGNAL_HPP_
#define FLOWRNN_GROUP_SIGNAL_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "flowrnn/grid_signal.hpp"
#include "flowrnn/group_flow.hpp"

namespace flowrnn {

/// Which discrete group the hidden states live on.
enum class GroupKind {
  translation,       ///< Z_H × Z_W; one rotation slot
  roto_translation,  ///< (Z_N × Z_N) ⋊ C_4; four rotation slots, square grids
};

inline int rotation_slots(GroupKind kind) { return kind == GroupKind::translation ? 1 : 4; }

/// K-channel function on G, stored (rotation, channel, x, y).
/// Entry (r, k, x, y) is the value at the group element (translation (x,y), rotation r).
class GroupSignal {
 public:
  GroupSignal() = default;
  GroupSignal(Grid grid, int rotations, int channels);
  GroupSignal(Grid grid, int rotations, int channels, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int rotations() const { return rotations_; }
  int channels() const { return channels_; }
  GroupKind group() const {
    return rotations_ == 1 ? GroupKind::translation : GroupKind::roto_translation;
  }
  std::size_t size() const { return values_.size(); }

  std::size_t plane_index(int r, int k) const {
    return (static_cast<std::size_t>(r) * static_cast<std::size_t>(channels_) +
            static_cast<std::size_t>(k)) *
           grid_.cells();
  }
  double& at(int r, int k, std::int64_t x, std::int64_t y) {
    return values_[plane_index(r, k) + grid_.offset(x, y)];
  }
  double at(int r, int k, std::int64_t x, std::int64_t y) const {
    return values_[plane_index(r, k) + grid_.offset(x, y)];
  }
  std::span<double> plane(int r, int k) {
    return std::span<double>(values_).subspan(plane_index(r, k), grid_.cells());
  }
  std::span<const double> plane(int r, int k) const {
    return std::span<const double>(values_).subspan(plane_index(r, k), grid_.cells());
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const GroupSignal& o) const {
    return grid_ == o.grid_ && rotations_ == o.rotations_ && channels_ == o.channels_;
  }
  friend bool operator==(const GroupSignal&, const GroupSignal&) = default;

  /// Views a translation-group state as a plain signal, flattening (r, k)
  /// into r·K + k channels.
  Signal flatten() const;
  static GroupSignal from_signal(const Signal& s);

 private:
  Grid grid_;
  int rotations_ = 1;
  int channels_ = 0;
  std::vector<double> values_;
};

/// (g·h)(m) = h(g⁻¹·m). Rotations require a roto-translation state.
GroupSignal act(const GroupElement& g, const GroupSignal& h);

double max_abs_diff(const GroupSignal& a, const GroupSignal& b);
void add_inplace(GroupSignal& acc, const GroupSignal& other, double scale = 1.0);

/// Hidden state lifted to V × G: one GroupSignal per generator in V order.
struct LiftedState {
  std::shared_ptr<const FlowSet> flow_set;
  std::vector<GroupSignal> slices;

  LiftedState() = default;
  LiftedState(std::shared_ptr<const FlowSet> v, GroupSignal zero_slice);

  std::size_t size() const { return slices.size(); }
  const GroupSignal& operator[](std::size_t i) const { return slices[i]; }
  GroupSignal& operator[](std::size_t i) { return slices[i]; }
};

/// Zero state over V with the given per-slice shape.
LiftedState zero_lifted_state(std::shared_ptr<const FlowSet> v, Grid grid, int rotations,
                              int channels);

/// Applies one group element to the G axis of every slice (V untouched).
LiftedState act(const GroupElement& g, const LiftedState& h);

/// (ν̂·h)(ν) = h(ν − ν̂). Out-of-set slices are zero under drop truncation.
LiftedState shift_v(const LiftedState& h, const FlowGenerator& nu_hat,
                    Truncation mode = Truncation::drop);

double max_abs_diff(const LiftedState& a, const LiftedState& b);

}  // namespace flowrnn

#endif  // FLOWRNN_GROUP_SIGNAL_HPP_
