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

#ifndef FLOWRNN_SRC_CORRELATE_HPP_
#define FLOWRNN_SRC_CORRELATE_HPP_

#include <span>

#include "flowrnn/conv.hpp"

namespace flowrnn::detail {

// Shared engine behind every convolution in the library.
//
//   out(r, o, d) = Σ_s Σ_i Σ_q K[o][i][s](q) · in((s + r) mod R_in, i, d + A^r q)
//
// `in` is (R_in, K_in, H, W) and the kernel's rotation axis equals R_in.
// For a lifting convolution R_in = 1; for the translation group R_out = 1.
// Implemented as im2col followed by a dense product.

void gconv_forward(std::span<const double> in, int in_rotations, int in_channels,
                   const Grid& grid, const Kernel& kernel, int out_rotations,
                   std::span<double> out);

// Accumulates d(loss)/d(in) into grad_in and d(loss)/d(kernel) into
// grad_kernel. Either span may be empty to skip that product.
void gconv_backward(std::span<const double> in, int in_rotations, int in_channels,
                    const Grid& grid, const Kernel& kernel, int out_rotations,
                    std::span<const double> grad_out, std::span<double> grad_in,
                    std::span<double> grad_kernel);

}  // namespace flowrnn::detail

#endif  // FLOWRNN_SRC_CORRELATE_HPP_
