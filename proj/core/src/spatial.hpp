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

#ifndef FLOWRNN_SRC_SPATIAL_HPP_
#define FLOWRNN_SRC_SPATIAL_HPP_

#include <cstddef>
#include <vector>

#include "flowrnn/grid_signal.hpp"

namespace flowrnn::detail {

/// source[i] is the flat index of g⁻¹·x_i, so that (g·s)[i] = s[source[i]].
inline std::vector<std::size_t> pullback_map(const Grid& grid, const GroupElement& g) {
  const GroupElement inv = g.inverse();
  std::vector<std::size_t> source(grid.cells());
  std::size_t i = 0;
  for (int x = 0; x < grid.height; ++x) {
    for (int y = 0; y < grid.width; ++y, ++i) {
      const Vec2 p = inv.apply({x, y});
      source[i] = grid.offset(p.x, p.y);
    }
  }
  return source;
}

}  // namespace flowrnn::detail

#endif  // FLOWRNN_SRC_SPATIAL_HPP_
