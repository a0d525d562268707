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

#include "flowrnn/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flowrnn/errors.hpp"

namespace flowrnn {

std::string to_string(Nonlinearity s) {
  switch (s) {
    case Nonlinearity::relu: return "relu";
    case Nonlinearity::tanh: return "tanh";
    case Nonlinearity::identity: return "identity";
  }
  return "?";
}

std::string to_string(LiftMode m) { return m == LiftMode::trivial ? "trivial" : "nontrivial"; }
std::string to_string(ModelFamily f) { return f == ModelFamily::grnn ? "grnn" : "fernn"; }
std::string to_string(Readout r) { return r == Readout::current ? "current" : "advanced"; }

Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "relu") return Nonlinearity::relu;
  if (s == "tanh") return Nonlinearity::tanh;
  if (s == "identity") return Nonlinearity::identity;
  throw InvalidArgument("unknown nonlinearity '" + s + "'");
}

LiftMode parse_lift_mode(const std::string& s) {
  if (s == "trivial") return LiftMode::trivial;
  if (s == "nontrivial") return LiftMode::nontrivial;
  throw InvalidArgument("unknown lift mode '" + s + "'");
}

ModelFamily parse_model_family(const std::string& s) {
  if (s == "grnn") return ModelFamily::grnn;
  if (s == "fernn") return ModelFamily::fernn;
  throw InvalidArgument("unknown model family '" + s + "'");
}

Readout parse_readout(const std::string& s) {
  if (s == "current") return Readout::current;
  if (s == "advanced") return Readout::advanced;
  throw InvalidArgument("unknown readout '" + s + "'");
}

double activate(Nonlinearity s, double x) {
  switch (s) {
    case Nonlinearity::relu: return x > 0.0 ? x : 0.0;
    case Nonlinearity::tanh: return std::tanh(x);
    case Nonlinearity::identity: return x;
  }
  return x;
}

double activate_grad_from_output(Nonlinearity s, double y) {
  switch (s) {
    case Nonlinearity::relu: return y > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::tanh: return 1.0 - y * y;
    case Nonlinearity::identity: return 1.0;
  }
  return 1.0;
}

void activate_inplace(Nonlinearity s, GroupSignal& h) {
  if (s == Nonlinearity::identity) return;
  for (double& v : h.values()) v = activate(s, v);
}

FERNNParams as_fernn(const GRNNParams& p) {
  FERNNParams out;
  out.input = p.input;
  out.recurrent = VKernel::delta(p.recurrent);
  out.flow_set = std::make_shared<const FlowSet>(singleton_flow_set());
  out.sigma = p.sigma;
  out.lift_mode = LiftMode::trivial;
  out.group = p.group;
  return out;
}

Signal decode(const DecoderParams& d, const Signal& x) {
  if (d.layers.empty()) return x;
  Signal cur = x;
  for (std::size_t l = 0; l < d.layers.size(); ++l) {
    cur = lift_conv(cur, d.layers[l], GroupKind::translation).flatten();
    if (l + 1 < d.layers.size()) {
      for (double& v : cur.values()) v = v > 0.0 ? v : 0.0;
    }
  }
  return cur;
}

GroupSignal grnn_step(const GroupSignal& h, const Signal& f, const GRNNParams& p) {
  if (h.rotations() != rotation_slots(p.group)) {
    throw ShapeMismatch("grnn_step: state rotation axis does not match the group");
  }
  GroupSignal out = group_conv(h, p.recurrent);
  add_inplace(out, lift_conv(f, p.input, p.group));
  activate_inplace(p.sigma, out);
  return out;
}

namespace {

void check_state(const LiftedState& h, const FERNNParams& p) {
  if (!h.flow_set || !p.flow_set) throw InvalidArgument("missing flow set");
  if (h.flow_set != p.flow_set && !(*h.flow_set == *p.flow_set)) {
    throw FlowSetMismatch("state and parameters use different flow sets");
  }
  if (h.size() != p.flow_set->size()) throw ShapeMismatch("state has the wrong number of slices");
}

}  // namespace

LiftedState fernn_step(const LiftedState& h, const Signal& f, const FERNNParams& p,
                       std::int64_t t) {
  if (p.lift_mode == LiftMode::nontrivial) return fernn_step_nontrivial(h, f, p, t);
  check_state(h, p);
  const FlowSet& v = *p.flow_set;
  LiftedState conv = flow_conv(h, p.recurrent, p.truncation);
  const GroupSignal lifted = lift_conv(f, p.input, p.group);
  LiftedState out;
  out.flow_set = h.flow_set;
  out.slices.reserve(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    GroupSignal s = v[n].is_zero() ? std::move(conv[n]) : act(flow_element(v[n], 1), conv[n]);
    add_inplace(s, lifted);
    activate_inplace(p.sigma, s);
    out.slices.push_back(std::move(s));
  }
  return out;
}

LiftedState fernn_step_nontrivial(const LiftedState& h, const Signal& f, const FERNNParams& p,
                                  std::int64_t t) {
  check_state(h, p);
  LiftedState out = flow_conv(h, p.recurrent, p.truncation);
  const LiftedState lifted = nontrivial_lift_conv(f, p.input, p.flow_set, t, p.group);
  for (std::size_t n = 0; n < out.size(); ++n) {
    add_inplace(out[n], lifted[n]);
    activate_inplace(p.sigma, out[n]);
  }
  return out;
}

GroupSignal pool_over_v(const LiftedState& h, std::vector<std::uint32_t>* argmax) {
  if (h.size() == 0) throw InvalidArgument("pool_over_v on an empty state");
  GroupSignal out = h[0];
  if (argmax != nullptr) argmax->assign(out.size(), 0);
  auto dst = out.values();
  for (std::size_t n = 1; n < h.size(); ++n) {
    auto src = h[n].values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (src[i] > dst[i]) {
        dst[i] = src[i];
        if (argmax != nullptr) (*argmax)[i] = static_cast<std::uint32_t>(n);
      }
    }
  }
  return out;
}

std::vector<std::span<double>> Model::parameters() {
  std::vector<std::span<double>> out{core.input.values(), core.recurrent.base.values()};
  if (core.recurrent.v_profile) out.emplace_back(*core.recurrent.v_profile);
  for (auto& k : decoder.layers) out.push_back(k.values());
  return out;
}

std::vector<std::span<const double>> Model::parameters() const {
  std::vector<std::span<const double>> out{core.input.values(), core.recurrent.base.values()};
  if (core.recurrent.v_profile) out.emplace_back(*core.recurrent.v_profile);
  for (const auto& k : decoder.layers) out.push_back(k.values());
  return out;
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> out{"input", "recurrent"};
  if (core.recurrent.v_profile) out.emplace_back("v_profile");
  for (std::size_t l = 0; l < decoder.layers.size(); ++l) {
    out.push_back("decoder." + std::to_string(l));
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (auto p : parameters()) n += p.size();
  return n;
}

namespace {

void fill_uniform(std::span<double> v, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : v) x = dist(rng);
}

}  // namespace

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.hidden_channels < 1 || spec.data_channels < 1) {
    throw InvalidArgument("channel counts must be positive");
  }
  std::mt19937_64 rng(seed);
  const int rot = rotation_slots(spec.group);
  const int ks = spec.kernel_size;

  Model m;
  m.family = spec.family;
  m.readout = spec.readout;
  m.core.group = spec.group;
  m.core.sigma = spec.sigma;
  m.core.truncation = spec.truncation;
  if (spec.family == ModelFamily::grnn) {
    m.core.flow_set = std::make_shared<const FlowSet>(singleton_flow_set());
    m.core.lift_mode = LiftMode::trivial;
  } else {
    if (!spec.flow_set) throw InvalidArgument("a fernn needs a flow set");
    m.core.flow_set = spec.flow_set;
    m.core.lift_mode = spec.lift_mode;
  }

  m.core.input = Kernel(spec.hidden_channels, spec.data_channels, ks, ks, 1);
  fill_uniform(m.core.input.values(),
               std::sqrt(6.0 / static_cast<double>(spec.data_channels * ks * ks)), rng);
  Kernel rec(spec.hidden_channels, spec.hidden_channels, ks, ks, rot);
  fill_uniform(rec.values(),
               spec.recurrent_gain *
                   std::sqrt(3.0 / static_cast<double>(spec.hidden_channels * rot * ks * ks)),
               rng);
  if (spec.full_profile && spec.family == ModelFamily::fernn) {
    std::vector<double> profile(m.core.flow_set->size(), 0.0);
    if (auto z = m.core.flow_set->find(FlowGenerator::zero())) profile[*z] = 1.0;
    m.core.recurrent = VKernel::full(std::move(rec), std::move(profile));
  } else {
    m.core.recurrent = VKernel::delta(std::move(rec));
  }

  int in = spec.hidden_channels * rot;
  std::vector<int> widths = spec.decoder_hidden;
  widths.push_back(spec.data_channels);
  const int dk = spec.decoder_kernel_size;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    Kernel k(widths[l], in, dk, dk, 1);
    const double gain = l + 1 < widths.size() ? 6.0 : 3.0;
    fill_uniform(k.values(), std::sqrt(gain / static_cast<double>(in * dk * dk)), rng);
    m.decoder.layers.push_back(std::move(k));
    in = widths[l];
  }
  return m;
}

LiftedState model_step(const Model& m, const LiftedState& h, const Signal& f, std::int64_t t) {
  return fernn_step(h, f, m.core, t);
}

LiftedState zero_state(const Model& m, const Grid& grid) {
  return zero_lifted_state(m.core.flow_set, grid, m.rotations(), m.hidden_channels());
}

GroupElement readout_element(const Model& m, const FlowGenerator& nu, std::int64_t s) {
  const bool advanced = m.readout == Readout::advanced;
  if (m.core.lift_mode == LiftMode::trivial) {
    return advanced ? flow_element(nu, 1) : GroupElement::identity();
  }
  return flow_element(nu, advanced ? s : s - 1);
}

Signal predict_frame(const Model& m, const LiftedState& h, std::int64_t s) {
  const FlowSet& v = *h.flow_set;
  LiftedState aligned;
  aligned.flow_set = h.flow_set;
  aligned.slices.reserve(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const GroupElement g = readout_element(m, v[n], s);
    aligned.slices.push_back(g == GroupElement::identity() ? h[n] : act(g, h[n]));
  }
  return decode(m.decoder, pool_over_v(aligned).flatten());
}

SpaceTimeSignal rollout(const Model& m, const SpaceTimeSignal& f, int warmup, int horizon,
                        RolloutMode mode) {
  if (warmup < 1 || horizon < 1) throw InvalidArgument("warmup and horizon must be >= 1");
  const std::size_t need = mode == RolloutMode::teacher_forced
                               ? static_cast<std::size_t>(warmup + horizon - 1)
                               : static_cast<std::size_t>(warmup);
  if (f.length() < need) {
    throw ShapeMismatch("rollout needs " + std::to_string(need) + " input frames, got " +
                        std::to_string(f.length()));
  }
  LiftedState h = zero_state(m, f.grid());
  SpaceTimeSignal preds;
  Signal fed;
  for (int t = 0; t < warmup + horizon - 1; ++t) {
    const bool feed_back = mode == RolloutMode::autoregressive && t >= warmup;
    h = model_step(m, h, feed_back ? fed : f[static_cast<std::size_t>(t)], t);
    if (t + 1 >= warmup) {
      fed = predict_frame(m, h, t + 1);
      preds.push_back(fed);
    }
  }
  return preds;
}

std::vector<LiftedState> hidden_trajectory(const Model& m, const SpaceTimeSignal& f) {
  std::vector<LiftedState> out;
  LiftedState h = zero_state(m, f.grid());
  for (std::size_t t = 0; t < f.length(); ++t) {
    h = model_step(m, h, f[t], static_cast<std::int64_t>(t));
    out.push_back(h);
  }
  return out;
}

}  // namespace flowrnn
