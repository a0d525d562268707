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

#include "correlate.hpp"

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "flowrnn/errors.hpp"

namespace flowrnn::detail {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

struct Layout {
  int in_rot;
  int in_ch;
  int out_rot;
  int out_ch;
  std::size_t cells;
  std::size_t taps;
  std::size_t rows;  // in_ch * in_rot * taps

  Layout(int in_rotations, int in_channels, const Grid& grid, const Kernel& k,
         int out_rotations)
      : in_rot(in_rotations),
        in_ch(in_channels),
        out_rot(out_rotations),
        out_ch(k.out_channels()),
        cells(grid.cells()),
        taps(k.taps_per_plane()),
        rows(static_cast<std::size_t>(in_channels) * in_rotations * k.taps_per_plane()) {
    if (k.in_channels() != in_channels) {
      throw ShapeMismatch("kernel expects " + std::to_string(k.in_channels()) +
                          " input channels, got " + std::to_string(in_channels));
    }
    if (k.rotations() != in_rotations) {
      throw ShapeMismatch("kernel rotation axis does not match input rotation axis");
    }
    if (out_rotations != 1 && out_rotations != 4) {
      throw InvalidArgument("output rotation axis must be 1 or 4");
    }
    if (out_rotations == 4 && !grid.is_square()) {
      throw NonSquareGrid("roto-translation convolution needs a square grid");
    }
  }

  std::size_t in_plane(int s_plus_r, int i) const {
    return (static_cast<std::size_t>(s_plus_r % in_rot) * in_ch + i) * cells;
  }
};

// gather[q * cells + d] is the flat offset of d + A^r q_offset.
std::vector<std::size_t> gather_table(const Grid& grid, const Kernel& k, int r) {
  const int ca = k.kh() / 2;
  const int cb = k.kw() / 2;
  std::vector<std::size_t> table(k.taps_per_plane() * grid.cells());
  std::size_t q = 0;
  for (int a = 0; a < k.kh(); ++a) {
    for (int b = 0; b < k.kw(); ++b, ++q) {
      const Vec2 shift = rotate_quarter({a - ca, b - cb}, r);
      std::size_t* row = table.data() + q * grid.cells();
      std::size_t d = 0;
      for (int x = 0; x < grid.height; ++x) {
        for (int y = 0; y < grid.width; ++y, ++d) {
          row[d] = grid.offset(x + shift.x, y + shift.y);
        }
      }
    }
  }
  return table;
}

void fill_columns(std::span<const double> in, const Layout& L,
                  const std::vector<std::size_t>& gather, int r, std::vector<double>& col) {
  col.resize(L.rows * L.cells);
  double* dst = col.data();
  for (int i = 0; i < L.in_ch; ++i) {
    for (int s = 0; s < L.in_rot; ++s) {
      const double* plane = in.data() + L.in_plane(s + r, i);
      for (std::size_t q = 0; q < L.taps; ++q) {
        const std::size_t* g = gather.data() + q * L.cells;
        for (std::size_t d = 0; d < L.cells; ++d) dst[d] = plane[g[d]];
        dst += L.cells;
      }
    }
  }
}

}  // namespace

void gconv_forward(std::span<const double> in, int in_rotations, int in_channels,
                   const Grid& grid, const Kernel& kernel, int out_rotations,
                   std::span<double> out) {
  const Layout L(in_rotations, in_channels, grid, kernel, out_rotations);
  if (in.size() != static_cast<std::size_t>(L.in_rot) * L.in_ch * L.cells ||
      out.size() != static_cast<std::size_t>(L.out_rot) * L.out_ch * L.cells) {
    throw ShapeMismatch("convolution buffer sizes do not match the layout");
  }
  ConstMapMatrix w(kernel.values().data(), L.out_ch, static_cast<Eigen::Index>(L.rows));
  std::vector<double> col;
  for (int r = 0; r < L.out_rot; ++r) {
    const auto gather = gather_table(grid, kernel, r);
    fill_columns(in, L, gather, r, col);
    ConstMapMatrix c(col.data(), static_cast<Eigen::Index>(L.rows),
                     static_cast<Eigen::Index>(L.cells));
    MapMatrix o(out.data() + static_cast<std::size_t>(r) * L.out_ch * L.cells, L.out_ch,
                static_cast<Eigen::Index>(L.cells));
    o.noalias() = w * c;
  }
}

void gconv_backward(std::span<const double> in, int in_rotations, int in_channels,
                    const Grid& grid, const Kernel& kernel, int out_rotations,
                    std::span<const double> grad_out, std::span<double> grad_in,
                    std::span<double> grad_kernel) {
  const Layout L(in_rotations, in_channels, grid, kernel, out_rotations);
  if (grad_out.size() != static_cast<std::size_t>(L.out_rot) * L.out_ch * L.cells) {
    throw ShapeMismatch("gradient buffer does not match the convolution output");
  }
  if (!grad_in.empty() && grad_in.size() != in.size()) {
    throw ShapeMismatch("input gradient buffer has the wrong size");
  }
  if (!grad_kernel.empty() && grad_kernel.size() != kernel.size()) {
    throw ShapeMismatch("kernel gradient buffer has the wrong size");
  }
  ConstMapMatrix w(kernel.values().data(), L.out_ch, static_cast<Eigen::Index>(L.rows));
  std::vector<double> col;
  RowMatrix gcol;
  for (int r = 0; r < L.out_rot; ++r) {
    const auto gather = gather_table(grid, kernel, r);
    ConstMapMatrix go(grad_out.data() + static_cast<std::size_t>(r) * L.out_ch * L.cells,
                      L.out_ch, static_cast<Eigen::Index>(L.cells));
    if (!grad_kernel.empty()) {
      fill_columns(in, L, gather, r, col);
      ConstMapMatrix c(col.data(), static_cast<Eigen::Index>(L.rows),
                       static_cast<Eigen::Index>(L.cells));
      MapMatrix gw(grad_kernel.data(), L.out_ch, static_cast<Eigen::Index>(L.rows));
      gw.noalias() += go * c.transpose();
    }
    if (!grad_in.empty()) {
      gcol.noalias() = w.transpose() * go;
      const double* src = gcol.data();
      for (int i = 0; i < L.in_ch; ++i) {
        for (int s = 0; s < L.in_rot; ++s) {
          double* plane = grad_in.data() + L.in_plane(s + r, i);
          for (std::size_t q = 0; q < L.taps; ++q) {
            const std::size_t* g = gather.data() + q * L.cells;
            for (std::size_t d = 0; d < L.cells; ++d) plane[g[d]] += src[d];
            src += L.cells;
          }
        }
      }
    }
  }
}

}  // namespace flowrnn::detail
