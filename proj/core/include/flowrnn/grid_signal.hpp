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

#ifndef FLOWRNN_GRID_SIGNAL_HPP_
#define FLOWRNN_GRID_SIGNAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "flowrnn/group_flow.hpp"

namespace flowrnn {

/// Cyclic H×W pixel grid. All coordinate arithmetic wraps modulo (H, W).
struct Grid {
  int height = 1;
  int width = 1;

  Grid() = default;
  Grid(int h, int w);

  std::size_t cells() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool is_square() const { return height == width; }
  /// Flat row-major offset of a (possibly out-of-range) coordinate.
  std::size_t offset(std::int64_t x, std::int64_t y) const {
    return static_cast<std::size_t>(wrap_index(x, height)) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(wrap_index(y, width));
  }
  friend bool operator==(const Grid&, const Grid&) = default;
};

/// K-channel real signal on a cyclic grid, stored channel-major (K, H, W).
class Signal {
 public:
  Signal() = default;
  Signal(Grid grid, int channels);
  Signal(Grid grid, int channels, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t size() const { return values_.size(); }

  double& at(int k, std::int64_t x, std::int64_t y) {
    return values_[static_cast<std::size_t>(k) * grid_.cells() + grid_.offset(x, y)];
  }
  double at(int k, std::int64_t x, std::int64_t y) const {
    return values_[static_cast<std::size_t>(k) * grid_.cells() + grid_.offset(x, y)];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> channel(int k) {
    return std::span<double>(values_).subspan(static_cast<std::size_t>(k) * grid_.cells(),
                                              grid_.cells());
  }
  std::span<const double> channel(int k) const {
    return std::span<const double>(values_).subspan(
        static_cast<std::size_t>(k) * grid_.cells(), grid_.cells());
  }

  bool same_shape(const Signal& other) const {
    return grid_ == other.grid_ && channels_ == other.channels_;
  }
  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  Grid grid_;
  int channels_ = 0;
  std::vector<double> values_;
};

/// Ordered frames f_0..f_{T-1} sharing one grid and channel count.
class SpaceTimeSignal {
 public:
  SpaceTimeSignal() = default;
  explicit SpaceTimeSignal(std::vector<Signal> frames);

  std::size_t length() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const Signal& operator[](std::size_t t) const { return frames_[t]; }
  Signal& operator[](std::size_t t) { return frames_[t]; }
  const std::vector<Signal>& frames() const { return frames_; }
  const Grid& grid() const;
  int channels() const;

  /// Appends a frame; throws ShapeMismatch if it disagrees with frame 0.
  void push_back(Signal frame);

  friend bool operator==(const SpaceTimeSignal&, const SpaceTimeSignal&) = default;

 private:
  std::vector<Signal> frames_;
};

/// (d·s)(k, x, y) = s(k, x − dx, y − dy), cyclic.
Signal act_translate(const Signal& s, Vec2 d);
/// Exact quarter-turn rotation about pixel (0,0); needs a square grid.
Signal act_rotate90(const Signal& s, int quarter_turns);
/// (g·s)(x) = s(g⁻¹·x) for any element of Z² ⋊ C_4.
Signal act(const GroupElement& g, const Signal& s);
/// Frame t of the result is ψ_t(ν) applied to frame t of `seq`.
SpaceTimeSignal apply_flow_to_sequence(const SpaceTimeSignal& seq, const FlowGenerator& nu);

// Elementwise helpers used throughout tests and training code.
Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator*(double alpha, const Signal& s);
double max_abs_diff(const Signal& a, const Signal& b);

}  // namespace flowrnn

#endif  // FLOWRNN_GRID_SIGNAL_HPP_
