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

#ifndef FLOWRNN_CONV_HPP_
#define FLOWRNN_CONV_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flowrnn/grid_signal.hpp"
#include "flowrnn/group_flow.hpp"
#include "flowrnn/group_signal.hpp"

namespace flowrnn {

/// Convolution weights, laid out (out, in, rotation, kh, kw).
///
/// Tap (a, b) holds the weight at spatial offset (a − kh/2, b − kw/2). A
/// kernel with rotations == 4 is a function on (Z² ⋊ C_4) and is used for
/// group convolutions over roto-translation states; lifting kernels always
/// have rotations == 1. Offsets past the grid size wrap and accumulate.
class Kernel {
 public:
  Kernel() = default;
  Kernel(int out_channels, int in_channels, int kh, int kw, int rotations = 1);
  Kernel(int out_channels, int in_channels, int kh, int kw, int rotations,
         std::vector<double> taps);

  /// Identity map: 1 at the central tap, rotation 0, for matching channels.
  static Kernel delta(int channels, int rotations = 1, int size = 1);
  /// Same value at every tap.
  static Kernel constant(int out_channels, int in_channels, int kh, int kw, double value,
                         int rotations = 1);

  int out_channels() const { return out_; }
  int in_channels() const { return in_; }
  int rotations() const { return rot_; }
  int kh() const { return kh_; }
  int kw() const { return kw_; }
  std::size_t taps_per_plane() const { return static_cast<std::size_t>(kh_) * kw_; }
  std::size_t size() const { return taps_.size(); }

  std::size_t index(int o, int i, int s, int a, int b) const {
    return (((static_cast<std::size_t>(o) * in_ + i) * rot_ + s) * kh_ + a) * kw_ + b;
  }
  double& at(int o, int i, int s, int a, int b) { return taps_[index(o, i, s, a, b)]; }
  double at(int o, int i, int s, int a, int b) const { return taps_[index(o, i, s, a, b)]; }
  /// Weight at spatial offset (dx, dy), zero outside the support.
  double offset_weight(int o, int i, int s, std::int64_t dx, std::int64_t dy) const;

  std::span<double> values() { return taps_; }
  std::span<const double> values() const { return taps_; }

  bool same_shape(const Kernel& k) const {
    return out_ == k.out_ && in_ == k.in_ && rot_ == k.rot_ && kh_ == k.kh_ && kw_ == k.kw_;
  }
  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  int out_ = 0;
  int in_ = 0;
  int rot_ = 1;
  int kh_ = 1;
  int kw_ = 1;
  std::vector<double> taps_;
};

/// Hidden-to-hidden kernel on V × G: W(δ, g) = p(δ)·W_base(g).
/// Without a profile the kernel is δ-restricted: p(δ) = [δ = 0].
struct VKernel {
  Kernel base;
  /// One weight per element of V, indexed by the position of δ = γ − ν.
  std::optional<std::vector<double>> v_profile;

  static VKernel delta(Kernel base) { return {std::move(base), std::nullopt}; }
  static VKernel full(Kernel base, std::vector<double> profile) {
    return {std::move(base), std::move(profile)};
  }
  bool is_delta() const { return !v_profile.has_value(); }
};

/// [f ⋆̂ U](g) = Σ_x Σ_k f_k(x) U_k(g⁻¹·x).
GroupSignal lift_conv(const Signal& f, const Kernel& u,
                      GroupKind group = GroupKind::translation);

/// [h ⋆ W](g) = Σ_m Σ_k h_k(m) W_k(g⁻¹·m); the group is read from h.
GroupSignal group_conv(const GroupSignal& h, const Kernel& w);

/// Trivial lift: the lift_conv output copied to every ν ∈ V.
LiftedState flow_lift_conv(const Signal& f, const Kernel& u, std::shared_ptr<const FlowSet> v,
                           GroupKind group = GroupKind::translation);

/// [h ⋆ W](ν, g) = Σ_γ Σ_m Σ_k h_k(γ, m) W_k(γ − ν, g⁻¹·m).
LiftedState flow_conv(const LiftedState& h, const VKernel& w,
                      Truncation mode = Truncation::drop);

/// Slice ν is lift_conv(ψ_t(ν)⁻¹·f, U).
LiftedState nontrivial_lift_conv(const Signal& f, const Kernel& u,
                                 std::shared_ptr<const FlowSet> v, std::int64_t t,
                                 GroupKind group = GroupKind::translation);

// Adjoints. Each accumulates into the non-null outputs, which must already
// have the right shape.

void lift_conv_backward(const Signal& f, const Kernel& u, GroupKind group,
                        const GroupSignal& grad_out, Signal* grad_f, Kernel* grad_u);

void group_conv_backward(const GroupSignal& h, const Kernel& w, const GroupSignal& grad_out,
                         GroupSignal* grad_h, Kernel* grad_w);

/// grad_profile is only touched for full-profile kernels.
void flow_conv_backward(const LiftedState& h, const VKernel& w, const LiftedState& grad_out,
                        LiftedState* grad_h, Kernel* grad_base,
                        std::vector<double>* grad_profile,
                        Truncation mode = Truncation::drop);

}  // namespace flowrnn

#endif  // FLOWRNN_CONV_HPP_
