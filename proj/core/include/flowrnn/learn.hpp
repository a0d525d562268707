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

#ifndef FLOWRNN_LEARN_HPP_
#define FLOWRNN_LEARN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowrnn/grid_signal.hpp"
#include "flowrnn/rnn.hpp"

namespace flowrnn {

struct LossReport {
  double total_mse = 0.0;
  std::vector<double> per_step_mse;
};

/// Mean over frames of the per-frame mean squared error.
LossReport mse_loss(const SpaceTimeSignal& pred, const SpaceTimeSignal& target);

/// One buffer per Model::parameters() entry.
struct GradientSet {
  std::vector<std::vector<double>> tensors;

  static GradientSet zeros_like(const Model& m);
  void add(const GradientSet& other, double scale = 1.0);
  void scale(double s);
  double global_norm() const;
  bool all_finite() const;
};

/// Target frames warmup .. warmup+horizon-1 of a sequence.
SpaceTimeSignal target_frames(const SpaceTimeSignal& seq, int warmup, int horizon);

/// Teacher-forced loss of one sequence and its gradient, accumulated into
/// `grad` with weight `weight`.
LossReport sequence_backward(const Model& m, const SpaceTimeSignal& seq, int warmup, int horizon,
                             GradientSet& grad, double weight = 1.0);

/// Batch-mean loss and gradient. Samples are spread over `threads` workers and
/// reduced in sample order, so the result does not depend on the thread count.
/// Throws NonFiniteGradient.
std::pair<LossReport, GradientSet> backward(const Model& m,
                                            std::span<const SpaceTimeSignal> batch, int warmup,
                                            int horizon, int threads = 1);

/// Per-sequence losses of a rollout over a whole set, plus their mean.
struct EvalResult {
  LossReport aggregate;
  std::vector<LossReport> per_sequence;
};

EvalResult evaluate(const Model& m, std::span<const SpaceTimeSignal> set, int warmup,
                    int horizon, RolloutMode mode, int threads = 1);

enum class OptimizerKind { adam, sgd };
OptimizerKind parse_optimizer(const std::string& s);
std::string to_string(OptimizerKind k);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 1e-4;
  int steps = 100;
  int batch = 8;
  double grad_clip = 1.0;  ///< global-norm bound; <= 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int warmup = 6;
  int horizon = 6;
  std::uint64_t seed = 0;
  int threads = 1;
  int eval_every = 0;  ///< 0 disables periodic validation
};

struct TrainRecord {
  int step = 0;
  double train_mse = 0.0;
  double grad_norm = 0.0;
};

struct ValidationRecord {
  int step = 0;
  LossReport report;
};

struct TrainResult {
  Model model;
  std::vector<TrainRecord> curve;
  std::vector<ValidationRecord> validation;
};

/// Called after each optimizer step; return false to stop early.
using TrainCallback = std::function<bool(const TrainRecord&)>;

/// Minibatches are drawn by reshuffling the training set every epoch with a
/// generator seeded from cfg.seed.
TrainResult train(Model model, std::span<const SpaceTimeSignal> train_set,
                  std::span<const SpaceTimeSignal> val_set, const TrainConfig& cfg,
                  const TrainCallback& on_step = {});

/// Central-difference comparison on randomly sampled parameter entries.
struct GradCheckEntry {
  std::size_t tensor = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  /// Taps rejected because ±eps crossed a relu kink or changed a V argmax.
  std::size_t skipped_kinks = 0;
};

/// rel_error = |a - n| / max(|a|, |n|, abs_floor).
GradCheckReport check_gradients(const Model& m, std::span<const SpaceTimeSignal> batch,
                                int warmup, int horizon, std::size_t taps, double eps,
                                std::uint64_t seed, double abs_floor = 1e-6);

}  // namespace flowrnn

#endif  // FLOWRNN_LEARN_HPP_
