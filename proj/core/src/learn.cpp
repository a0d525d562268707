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

#include "flowrnn/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "flowrnn/errors.hpp"

namespace flowrnn {

LossReport mse_loss(const SpaceTimeSignal& pred, const SpaceTimeSignal& target) {
  if (pred.length() != target.length() || pred.empty()) {
    throw ShapeMismatch("mse_loss: sequences differ in length or are empty");
  }
  LossReport r;
  for (std::size_t t = 0; t < pred.length(); ++t) {
    if (!pred[t].same_shape(target[t])) throw ShapeMismatch("mse_loss: frame shape mismatch");
    auto a = pred[t].values();
    auto b = target[t].values();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    r.per_step_mse.push_back(s / static_cast<double>(a.size()));
  }
  r.total_mse = std::accumulate(r.per_step_mse.begin(), r.per_step_mse.end(), 0.0) /
                static_cast<double>(r.per_step_mse.size());
  return r;
}

GradientSet GradientSet::zeros_like(const Model& m) {
  GradientSet g;
  for (auto p : m.parameters()) g.tensors.emplace_back(p.size(), 0.0);
  return g;
}

void GradientSet::add(const GradientSet& other, double s) {
  if (other.tensors.size() != tensors.size()) throw ShapeMismatch("gradient set layout mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (other.tensors[i].size() != tensors[i].size()) {
      throw ShapeMismatch("gradient tensor size mismatch");
    }
    for (std::size_t j = 0; j < tensors[i].size(); ++j) tensors[i][j] += s * other.tensors[i][j];
  }
}

void GradientSet::scale(double s) {
  for (auto& t : tensors) {
    for (double& v : t) v *= s;
  }
}

double GradientSet::global_norm() const {
  double s = 0.0;
  for (const auto& t : tensors) {
    for (double v : t) s += v * v;
  }
  return std::sqrt(s);
}

bool GradientSet::all_finite() const {
  for (const auto& t : tensors) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

SpaceTimeSignal target_frames(const SpaceTimeSignal& seq, int warmup, int horizon) {
  if (warmup < 1 || horizon < 1) throw InvalidArgument("warmup and horizon must be >= 1");
  if (seq.length() < static_cast<std::size_t>(warmup + horizon)) {
    throw ShapeMismatch("sequence of length " + std::to_string(seq.length()) +
                        " is shorter than warmup + horizon");
  }
  SpaceTimeSignal out;
  for (int t = warmup; t < warmup + horizon; ++t) out.push_back(seq[static_cast<std::size_t>(t)]);
  return out;
}

namespace {

// Everything the backward pass needs from one teacher-forced forward pass.
struct Trace {
  std::vector<LiftedState> hidden;  // h_0 .. h_S
  struct Readout {
    std::vector<std::uint32_t> argmax;
    std::vector<Signal> activations;  // decoder layer inputs, post-relu
    Signal prediction;
  };
  std::vector<Readout> readouts;  // for s = warmup .. S
};

// Layer l input `activations[l]`; returns the decoder output.
Signal decode_traced(const DecoderParams& d, Signal x, std::vector<Signal>& activations) {
  activations.clear();
  for (std::size_t l = 0; l < d.layers.size(); ++l) {
    activations.push_back(x);
    x = lift_conv(x, d.layers[l], GroupKind::translation).flatten();
    if (l + 1 < d.layers.size()) {
      for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
    }
  }
  return x;
}

LiftedState align_for_readout(const Model& m, const LiftedState& h, std::int64_t s) {
  LiftedState out;
  out.flow_set = h.flow_set;
  for (std::size_t n = 0; n < h.size(); ++n) {
    const GroupElement g = readout_element(m, (*h.flow_set)[n], s);
    out.slices.push_back(g == GroupElement::identity() ? h[n] : act(g, h[n]));
  }
  return out;
}

Trace forward(const Model& m, const SpaceTimeSignal& seq, int warmup, int horizon) {
  const int steps = warmup + horizon - 1;
  if (seq.length() < static_cast<std::size_t>(steps)) {
    throw ShapeMismatch("sequence too short for warmup + horizon");
  }
  Trace tr;
  tr.hidden.push_back(zero_state(m, seq.grid()));
  for (int t = 0; t < steps; ++t) {
    tr.hidden.push_back(model_step(m, tr.hidden.back(), seq[static_cast<std::size_t>(t)], t));
  }
  for (int s = warmup; s <= steps; ++s) {
    Trace::Readout r;
    const LiftedState aligned = align_for_readout(m, tr.hidden[static_cast<std::size_t>(s)], s);
    const Signal pooled = pool_over_v(aligned, &r.argmax).flatten();
    r.prediction = decode_traced(m.decoder, pooled, r.activations);
    tr.readouts.push_back(std::move(r));
  }
  return tr;
}

// FNV-1a over every piecewise-linear decision taken by the forward pass.
std::uint64_t decision_signature(const Model& m, const Trace& tr) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  if (m.core.sigma == Nonlinearity::relu) {
    for (const auto& state : tr.hidden) {
      for (const auto& slice : state.slices) {
        for (double v : slice.values()) mix(v > 0.0 ? 1 : 0);
      }
    }
  }
  for (const auto& r : tr.readouts) {
    for (auto a : r.argmax) mix(a);
    for (std::size_t l = 1; l < r.activations.size(); ++l) {
      for (double v : r.activations[l].values()) mix(v > 0.0 ? 1 : 0);
    }
  }
  return h;
}

constexpr std::size_t kInputKernel = 0;
constexpr std::size_t kRecurrentKernel = 1;

Kernel& view_kernel(std::vector<double>& buf, const Kernel& shape, Kernel& scratch) {
  scratch = Kernel(shape.out_channels(), shape.in_channels(), shape.kh(), shape.kw(),
                   shape.rotations(), std::move(buf));
  return scratch;
}

}  // namespace

LossReport sequence_backward(const Model& m, const SpaceTimeSignal& seq, int warmup, int horizon,
                             GradientSet& grad, double weight) {
  const Trace tr = forward(m, seq, warmup, horizon);
  SpaceTimeSignal preds;
  for (const auto& r : tr.readouts) preds.push_back(r.prediction);
  const SpaceTimeSignal targets = target_frames(seq, warmup, horizon);
  LossReport report = mse_loss(preds, targets);

  const FlowSet& v = *m.core.flow_set;
  const std::size_t profile_slot = m.core.recurrent.v_profile ? 2 : 0;
  const std::size_t decoder_slot = m.core.recurrent.v_profile ? 3 : 2;
  const int steps = warmup + horizon - 1;
  const Grid grid = seq.grid();

  // Kernel-shaped accumulators; moved back into `grad` at the end.
  Kernel g_input, g_rec;
  view_kernel(grad.tensors[kInputKernel], m.core.input, g_input);
  view_kernel(grad.tensors[kRecurrentKernel], m.core.recurrent.base, g_rec);
  std::vector<Kernel> g_dec(m.decoder.layers.size());
  for (std::size_t l = 0; l < g_dec.size(); ++l) {
    view_kernel(grad.tensors[decoder_slot + l], m.decoder.layers[l], g_dec[l]);
  }
  std::vector<double> g_profile;
  if (profile_slot != 0) g_profile = std::move(grad.tensors[profile_slot]);

  const double frame_scale =
      weight * 2.0 / (static_cast<double>(grid.cells()) * m.data_channels() * horizon);

  LiftedState dh = zero_state(m, grid);
  for (int s = steps; s >= 1; --s) {
    const std::size_t si = static_cast<std::size_t>(s);
    if (s >= warmup) {
      const auto& r = tr.readouts[static_cast<std::size_t>(s - warmup)];
      // Decoder adjoint.
      Signal gy(grid, m.data_channels());
      {
        auto p = r.prediction.values();
        auto q = seq[si].values();
        auto out = gy.values();
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = frame_scale * (p[i] - q[i]);
      }
      for (std::size_t l = m.decoder.layers.size(); l-- > 0;) {
        const Signal& a = r.activations[l];
        Signal ga(grid, a.channels());
        lift_conv_backward(a, m.decoder.layers[l], GroupKind::translation,
                           GroupSignal::from_signal(gy), &ga, &g_dec[l]);
        if (l > 0) {
          auto av = a.values();
          auto gv = ga.values();
          for (std::size_t i = 0; i < gv.size(); ++i) {
            if (!(av[i] > 0.0)) gv[i] = 0.0;
          }
        }
        gy = std::move(ga);
      }
      // Max-pool adjoint, then undo the readout alignment (a permutation).
      auto gp = gy.values();
      LiftedState gz = zero_state(m, grid);
      for (std::size_t i = 0; i < gp.size(); ++i) gz[r.argmax[i]].values()[i] += gp[i];
      for (std::size_t n = 0; n < v.size(); ++n) {
        const GroupElement g = readout_element(m, v[n], s);
        if (g == GroupElement::identity()) {
          add_inplace(dh[n], gz[n]);
        } else {
          add_inplace(dh[n], act(g.inverse(), gz[n]));
        }
      }
    }

    // h_s = σ(pre); pre = roll(conv(h_{s-1})) + lift(f_{s-1}).
    const LiftedState& h = tr.hidden[si];
    for (std::size_t n = 0; n < v.size(); ++n) {
      auto hv = h[n].values();
      auto dv = dh[n].values();
      for (std::size_t i = 0; i < dv.size(); ++i) {
        dv[i] *= activate_grad_from_output(m.core.sigma, hv[i]);
      }
    }
    const Signal& f = seq[si - 1];
    const std::int64_t t = s - 1;
    if (m.core.lift_mode == LiftMode::trivial) {
      GroupSignal dl = dh[0];
      for (std::size_t n = 1; n < v.size(); ++n) add_inplace(dl, dh[n]);
      lift_conv_backward(f, m.core.input, m.core.group, dl, nullptr, &g_input);
      for (std::size_t n = 0; n < v.size(); ++n) {
        if (!v[n].is_zero()) dh[n] = act(flow_element(v[n], 1).inverse(), dh[n]);
      }
    } else {
      for (std::size_t n = 0; n < v.size(); ++n) {
        const Signal moved = act(flow_element(v[n], t).inverse(), f);
        lift_conv_backward(moved, m.core.input, m.core.group, dh[n], nullptr, &g_input);
      }
    }
    LiftedState prev = zero_state(m, grid);
    if (s > 1) {
      flow_conv_backward(tr.hidden[si - 1], m.core.recurrent, dh, &prev, &g_rec,
                         profile_slot != 0 ? &g_profile : nullptr, m.core.truncation);
    }
    dh = std::move(prev);
  }

  auto take = [](Kernel& k) {
    auto v = k.values();
    return std::vector<double>(v.begin(), v.end());
  };
  grad.tensors[kInputKernel] = take(g_input);
  grad.tensors[kRecurrentKernel] = take(g_rec);
  for (std::size_t l = 0; l < g_dec.size(); ++l) grad.tensors[decoder_slot + l] = take(g_dec[l]);
  if (profile_slot != 0) grad.tensors[profile_slot] = std::move(g_profile);
  return report;
}

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers with contiguous chunks.
template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LossReport mean_report(const std::vector<LossReport>& reports) {
  LossReport r;
  if (reports.empty()) return r;
  r.per_step_mse.assign(reports[0].per_step_mse.size(), 0.0);
  for (const auto& x : reports) {
    r.total_mse += x.total_mse;
    for (std::size_t i = 0; i < r.per_step_mse.size(); ++i) r.per_step_mse[i] += x.per_step_mse[i];
  }
  const double inv = 1.0 / static_cast<double>(reports.size());
  r.total_mse *= inv;
  for (double& v : r.per_step_mse) v *= inv;
  return r;
}

}  // namespace

std::pair<LossReport, GradientSet> backward(const Model& m,
                                            std::span<const SpaceTimeSignal> batch, int warmup,
                                            int horizon, int threads) {
  if (batch.empty()) throw InvalidArgument("backward on an empty batch");
  std::vector<GradientSet> grads(batch.size(), GradientSet::zeros_like(m));
  std::vector<LossReport> reports(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    reports[i] = sequence_backward(m, batch[i], warmup, horizon, grads[i]);
  });
  GradientSet total = GradientSet::zeros_like(m);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& g : grads) total.add(g, inv);
  if (!total.all_finite()) throw NonFiniteGradient("gradient contains NaN or Inf");
  return {mean_report(reports), std::move(total)};
}

EvalResult evaluate(const Model& m, std::span<const SpaceTimeSignal> set, int warmup,
                    int horizon, RolloutMode mode, int threads) {
  EvalResult out;
  out.per_sequence.resize(set.size());
  parallel_for(set.size(), threads, [&](std::size_t i) {
    const SpaceTimeSignal pred = rollout(m, set[i], warmup, horizon, mode);
    out.per_sequence[i] = mse_loss(pred, target_frames(set[i], warmup, horizon));
  });
  out.aggregate = mean_report(out.per_sequence);
  return out;
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

TrainResult train(Model model, std::span<const SpaceTimeSignal> train_set,
                  std::span<const SpaceTimeSignal> val_set, const TrainConfig& cfg,
                  const TrainCallback& on_step) {
  if (cfg.steps < 0 || cfg.batch < 1) throw InvalidArgument("steps >= 0 and batch >= 1 required");
  if (cfg.steps > 0 && train_set.empty()) throw InvalidArgument("empty training set");
  TrainResult result;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  GradientSet first_moment = GradientSet::zeros_like(model);
  GradientSet second_moment = GradientSet::zeros_like(model);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  auto validate = [&](int step) {
    if (val_set.empty()) return;
    result.validation.push_back(
        {step, evaluate(model, val_set, cfg.warmup, cfg.horizon, RolloutMode::teacher_forced,
                        cfg.threads)
                   .aggregate});
  };

  std::vector<SpaceTimeSignal> batch;
  for (int step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    for (int b = 0; b < cfg.batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(train_set[order[cursor++]]);
    }
    auto [loss, grad] = backward(model, batch, cfg.warmup, cfg.horizon, cfg.threads);
    const double norm = grad.global_norm();
    if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) grad.scale(cfg.grad_clip / norm);

    auto params = model.parameters();
    if (cfg.optimizer == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        for (std::size_t j = 0; j < params[i].size(); ++j) {
          params[i][j] -= cfg.lr * grad.tensors[i][j];
        }
      }
    } else {
      beta1_pow *= cfg.beta1;
      beta2_pow *= cfg.beta2;
      const double c1 = 1.0 - beta1_pow;
      const double c2 = 1.0 - beta2_pow;
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto& mv = first_moment.tensors[i];
        auto& vv = second_moment.tensors[i];
        for (std::size_t j = 0; j < params[i].size(); ++j) {
          const double g = grad.tensors[i][j];
          mv[j] = cfg.beta1 * mv[j] + (1.0 - cfg.beta1) * g;
          vv[j] = cfg.beta2 * vv[j] + (1.0 - cfg.beta2) * g * g;
          params[i][j] -= cfg.lr * (mv[j] / c1) / (std::sqrt(vv[j] / c2) + cfg.adam_eps);
        }
      }
    }
    const TrainRecord rec{step, loss.total_mse, norm};
    result.curve.push_back(rec);
    if (cfg.eval_every > 0 && step % cfg.eval_every == 0) validate(step);
    if (on_step && !on_step(rec)) break;
  }
  if (cfg.eval_every > 0 && (result.validation.empty() ||
                             result.validation.back().step != static_cast<int>(result.curve.size()))) {
    validate(static_cast<int>(result.curve.size()));
  }
  result.model = std::move(model);
  return result;
}

namespace {

double batch_loss(const Model& m, std::span<const SpaceTimeSignal> batch, int warmup,
                  int horizon, std::uint64_t* signature) {
  double total = 0.0;
  std::uint64_t sig = 0;
  for (const auto& seq : batch) {
    const Trace tr = forward(m, seq, warmup, horizon);
    SpaceTimeSignal preds;
    for (const auto& r : tr.readouts) preds.push_back(r.prediction);
    total += mse_loss(preds, target_frames(seq, warmup, horizon)).total_mse;
    sig = sig * 31 + decision_signature(m, tr);
  }
  if (signature != nullptr) *signature = sig;
  return total / static_cast<double>(batch.size());
}

}  // namespace

GradCheckReport check_gradients(const Model& m, std::span<const SpaceTimeSignal> batch,
                                int warmup, int horizon, std::size_t taps, double eps,
                                std::uint64_t seed, double abs_floor) {
  const auto [loss, grad] = backward(m, batch, warmup, horizon, 1);
  (void)loss;
  std::uint64_t base_sig = 0;
  batch_loss(m, batch, warmup, horizon, &base_sig);

  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < grad.tensors.size(); ++i) {
    for (std::size_t j = 0; j < grad.tensors[i].size(); ++j) all.emplace_back(i, j);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);

  GradCheckReport report;
  Model probe = m;
  for (const auto& [i, j] : all) {
    if (report.entries.size() >= taps) break;
    auto params = probe.parameters();
    const double orig = params[i][j];
    std::uint64_t sig_plus = 0, sig_minus = 0;
    params[i][j] = orig + eps;
    const double lp = batch_loss(probe, batch, warmup, horizon, &sig_plus);
    params[i][j] = orig - eps;
    const double lm = batch_loss(probe, batch, warmup, horizon, &sig_minus);
    params[i][j] = orig;
    if (sig_plus != base_sig || sig_minus != base_sig) {
      ++report.skipped_kinks;
      continue;
    }
    GradCheckEntry e;
    e.tensor = i;
    e.index = j;
    e.analytic = grad.tensors[i][j];
    e.numeric = (lp - lm) / (2.0 * eps);
    e.rel_error = std::abs(e.analytic - e.numeric) /
                  std::max({std::abs(e.analytic), std::abs(e.numeric), abs_floor});
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace flowrnn
