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

#include "flowrnn/grid_signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowrnn/errors.hpp"
#include "spatial.hpp"

namespace flowrnn {

Grid::Grid(int h, int w) : height(h), width(w) {
  if (h < 1 || w < 1) {
    throw InvalidArgument("grid dimensions must be positive, got " + std::to_string(h) + "x" +
                          std::to_string(w));
  }
}

Signal::Signal(Grid grid, int channels)
    : grid_(grid), channels_(channels),
      values_(static_cast<std::size_t>(channels) * grid.cells(), 0.0) {
  if (channels < 1) throw InvalidArgument("signal needs at least one channel");
}

Signal::Signal(Grid grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
  if (channels < 1) throw InvalidArgument("signal needs at least one channel");
  if (values_.size() != static_cast<std::size_t>(channels) * grid.cells()) {
    throw ShapeMismatch("signal value count does not match K*H*W");
  }
}

SpaceTimeSignal::SpaceTimeSignal(std::vector<Signal> frames) {
  frames_.reserve(frames.size());
  for (auto& f : frames) push_back(std::move(f));
}

const Grid& SpaceTimeSignal::grid() const {
  if (frames_.empty()) throw InvalidArgument("empty space-time signal has no grid");
  return frames_.front().grid();
}

int SpaceTimeSignal::channels() const {
  if (frames_.empty()) throw InvalidArgument("empty space-time signal has no channels");
  return frames_.front().channels();
}

void SpaceTimeSignal::push_back(Signal frame) {
  if (!frames_.empty() && !frames_.front().same_shape(frame)) {
    throw ShapeMismatch("space-time signal frames must share grid and channel count");
  }
  frames_.push_back(std::move(frame));
}

Signal act_translate(const Signal& s, Vec2 d) { return act(GroupElement{d, 0}, s); }

Signal act_rotate90(const Signal& s, int quarter_turns) {
  return act(GroupElement::rotate(quarter_turns), s);
}

Signal act(const GroupElement& g, const Signal& s) {
  const Grid& grid = s.grid();
  if (g.rotation != 0 && !grid.is_square()) {
    throw NonSquareGrid("rotation needs a square grid, got " + std::to_string(grid.height) + "x" +
                        std::to_string(grid.width));
  }
  const auto source = detail::pullback_map(grid, g);
  Signal out(grid, s.channels());
  const std::size_t cells = grid.cells();
  for (int k = 0; k < s.channels(); ++k) {
    auto src = s.channel(k);
    auto dst = out.channel(k);
    for (std::size_t i = 0; i < cells; ++i) dst[i] = src[source[i]];
  }
  return out;
}

SpaceTimeSignal apply_flow_to_sequence(const SpaceTimeSignal& seq, const FlowGenerator& nu) {
  std::vector<Signal> frames;
  frames.reserve(seq.length());
  for (std::size_t t = 0; t < seq.length(); ++t) {
    frames.push_back(act(flow_element(nu, static_cast<std::int64_t>(t)), seq[t]));
  }
  return SpaceTimeSignal(std::move(frames));
}

namespace {

template <typename Op>
Signal zip(const Signal& a, const Signal& b, Op op) {
  if (!a.same_shape(b)) throw ShapeMismatch("elementwise op on differently shaped signals");
  Signal out(a.grid(), a.channels());
  auto x = a.values();
  auto y = b.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = op(x[i], y[i]);
  return out;
}

}  // namespace

Signal operator+(const Signal& a, const Signal& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}

Signal operator-(const Signal& a, const Signal& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}

Signal operator*(double alpha, const Signal& s) {
  Signal out = s;
  for (double& v : out.values()) v *= alpha;
  return out;
}

double max_abs_diff(const Signal& a, const Signal& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("max_abs_diff on differently shaped signals");
  double m = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace flowrnn
