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

#include "flowrnn/conv.hpp"

#include <string>

#include "correlate.hpp"
#include "flowrnn/errors.hpp"

namespace flowrnn {

Kernel::Kernel(int out_channels, int in_channels, int kh, int kw, int rotations)
    : out_(out_channels), in_(in_channels), rot_(rotations), kh_(kh), kw_(kw) {
  if (out_channels < 1 || in_channels < 1) throw InvalidArgument("kernel channels must be >= 1");
  if (kh < 1 || kw < 1 || kh % 2 == 0 || kw % 2 == 0) {
    throw InvalidArgument("kernel taps must be odd and positive, got " + std::to_string(kh) +
                          "x" + std::to_string(kw));
  }
  if (rotations != 1 && rotations != 4) throw InvalidArgument("kernel rotation axis must be 1 or 4");
  taps_.assign(static_cast<std::size_t>(out_) * in_ * rot_ * kh_ * kw_, 0.0);
}

Kernel::Kernel(int out_channels, int in_channels, int kh, int kw, int rotations,
               std::vector<double> taps)
    : Kernel(out_channels, in_channels, kh, kw, rotations) {
  if (taps.size() != taps_.size()) throw ShapeMismatch("kernel tap count mismatch");
  taps_ = std::move(taps);
}

Kernel Kernel::delta(int channels, int rotations, int size) {
  Kernel k(channels, channels, size, size, rotations);
  for (int c = 0; c < channels; ++c) k.at(c, c, 0, size / 2, size / 2) = 1.0;
  return k;
}

Kernel Kernel::constant(int out_channels, int in_channels, int kh, int kw, double value,
                        int rotations) {
  Kernel k(out_channels, in_channels, kh, kw, rotations);
  for (double& v : k.taps_) v = value;
  return k;
}

double Kernel::offset_weight(int o, int i, int s, std::int64_t dx, std::int64_t dy) const {
  const std::int64_t a = dx + kh_ / 2;
  const std::int64_t b = dy + kw_ / 2;
  if (a < 0 || a >= kh_ || b < 0 || b >= kw_) return 0.0;
  return at(o, i, s, static_cast<int>(a), static_cast<int>(b));
}

namespace {

void check_lift(const Signal& f, const Kernel& u, GroupKind group) {
  if (u.rotations() != 1) throw ShapeMismatch("lifting kernels are functions on X (rotations=1)");
  if (f.channels() != u.in_channels()) {
    throw ShapeMismatch("lift_conv: signal has " + std::to_string(f.channels()) +
                        " channels, kernel expects " + std::to_string(u.in_channels()));
  }
  if (group == GroupKind::roto_translation && !f.grid().is_square()) {
    throw NonSquareGrid("roto-translation lift needs a square grid");
  }
}

void check_flow_sets(const LiftedState& a, const LiftedState& b) {
  if (a.flow_set != b.flow_set && !(a.flow_set && b.flow_set && *a.flow_set == *b.flow_set)) {
    throw FlowSetMismatch("operands are lifted over different flow sets");
  }
}

}  // namespace

GroupSignal lift_conv(const Signal& f, const Kernel& u, GroupKind group) {
  check_lift(f, u, group);
  const int rot = rotation_slots(group);
  GroupSignal out(f.grid(), rot, u.out_channels());
  detail::gconv_forward(f.values(), 1, f.channels(), f.grid(), u, rot, out.values());
  return out;
}

GroupSignal group_conv(const GroupSignal& h, const Kernel& w) {
  if (w.rotations() != h.rotations()) {
    throw ShapeMismatch("group_conv: kernel and state live on different groups");
  }
  if (w.in_channels() != h.channels()) {
    throw ShapeMismatch("group_conv: state has " + std::to_string(h.channels()) +
                        " channels, kernel expects " + std::to_string(w.in_channels()));
  }
  GroupSignal out(h.grid(), h.rotations(), w.out_channels());
  detail::gconv_forward(h.values(), h.rotations(), h.channels(), h.grid(), w, h.rotations(),
                        out.values());
  return out;
}

LiftedState flow_lift_conv(const Signal& f, const Kernel& u, std::shared_ptr<const FlowSet> v,
                           GroupKind group) {
  return LiftedState(std::move(v), lift_conv(f, u, group));
}

LiftedState flow_conv(const LiftedState& h, const VKernel& w, Truncation mode) {
  const FlowSet& v = *h.flow_set;
  LiftedState out;
  out.flow_set = h.flow_set;
  out.slices.reserve(h.size());
  if (w.is_delta()) {
    for (const auto& s : h.slices) out.slices.push_back(group_conv(s, w.base));
    return out;
  }
  const auto& profile = *w.v_profile;
  if (profile.size() != v.size()) {
    throw ShapeMismatch("v_profile length must equal |V|");
  }
  std::vector<GroupSignal> conv;
  conv.reserve(h.size());
  for (const auto& s : h.slices) conv.push_back(group_conv(s, w.base));
  for (std::size_t n = 0; n < v.size(); ++n) {
    GroupSignal acc(conv[0].grid(), conv[0].rotations(), conv[0].channels());
    for (std::size_t g = 0; g < v.size(); ++g) {
      // δ = γ − ν
      if (auto j = shift_index(v, v[g], v[n], mode)) {
        if (profile[*j] != 0.0) add_inplace(acc, conv[g], profile[*j]);
      }
    }
    out.slices.push_back(std::move(acc));
  }
  return out;
}

LiftedState nontrivial_lift_conv(const Signal& f, const Kernel& u,
                                 std::shared_ptr<const FlowSet> v, std::int64_t t,
                                 GroupKind group) {
  check_lift(f, u, group);
  LiftedState out;
  out.flow_set = v;
  out.slices.reserve(v->size());
  for (const auto& nu : v->generators()) {
    out.slices.push_back(lift_conv(act(flow_element(nu, t).inverse(), f), u, group));
  }
  return out;
}

void lift_conv_backward(const Signal& f, const Kernel& u, GroupKind group,
                        const GroupSignal& grad_out, Signal* grad_f, Kernel* grad_u) {
  check_lift(f, u, group);
  std::span<double> gf;
  std::span<double> gu;
  if (grad_f != nullptr) {
    if (!grad_f->same_shape(f)) throw ShapeMismatch("grad_f shape mismatch");
    gf = grad_f->values();
  }
  if (grad_u != nullptr) {
    if (!grad_u->same_shape(u)) throw ShapeMismatch("grad_u shape mismatch");
    gu = grad_u->values();
  }
  detail::gconv_backward(f.values(), 1, f.channels(), f.grid(), u, rotation_slots(group),
                         grad_out.values(), gf, gu);
}

void group_conv_backward(const GroupSignal& h, const Kernel& w, const GroupSignal& grad_out,
                         GroupSignal* grad_h, Kernel* grad_w) {
  std::span<double> gh;
  std::span<double> gw;
  if (grad_h != nullptr) {
    if (!grad_h->same_shape(h)) throw ShapeMismatch("grad_h shape mismatch");
    gh = grad_h->values();
  }
  if (grad_w != nullptr) {
    if (!grad_w->same_shape(w)) throw ShapeMismatch("grad_w shape mismatch");
    gw = grad_w->values();
  }
  detail::gconv_backward(h.values(), h.rotations(), h.channels(), h.grid(), w, h.rotations(),
                         grad_out.values(), gh, gw);
}

void flow_conv_backward(const LiftedState& h, const VKernel& w, const LiftedState& grad_out,
                        LiftedState* grad_h, Kernel* grad_base,
                        std::vector<double>* grad_profile, Truncation mode) {
  check_flow_sets(h, grad_out);
  if (grad_h != nullptr) check_flow_sets(h, *grad_h);
  const FlowSet& v = *h.flow_set;
  if (w.is_delta()) {
    for (std::size_t n = 0; n < v.size(); ++n) {
      group_conv_backward(h[n], w.base, grad_out[n], grad_h ? &(*grad_h)[n] : nullptr,
                          grad_base);
    }
    return;
  }
  const auto& profile = *w.v_profile;
  if (grad_profile != nullptr) {
    if (grad_profile->size() != profile.size()) throw ShapeMismatch("grad_profile size");
  }
  // out(ν) = Σ_γ p[γ−ν] C(γ), C(γ) = group_conv(h(γ), W_base).
  for (std::size_t g = 0; g < v.size(); ++g) {
    GroupSignal grad_c(grad_out[0].grid(), grad_out[0].rotations(), grad_out[0].channels());
    GroupSignal conv;
    if (grad_profile != nullptr) conv = group_conv(h[g], w.base);
    for (std::size_t n = 0; n < v.size(); ++n) {
      auto j = shift_index(v, v[g], v[n], mode);
      if (!j) continue;
      add_inplace(grad_c, grad_out[n], profile[*j]);
      if (grad_profile != nullptr) {
        auto a = grad_out[n].values();
        auto c = conv.values();
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * c[i];
        (*grad_profile)[*j] += dot;
      }
    }
    group_conv_backward(h[g], w.base, grad_c, grad_h ? &(*grad_h)[g] : nullptr, grad_base);
  }
}

}  // namespace flowrnn
