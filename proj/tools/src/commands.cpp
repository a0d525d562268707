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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "flowrnn/data.hpp"
#include "flowrnn/equivariance.hpp"
#include "flowrnn/io.hpp"
#include "flowrnn/learn.hpp"
#include "flowrnn/rnn.hpp"
#include "report.hpp"

namespace flowrnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> command_sections(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"gen-data", {"run", "data"}},
      {"check-equivariance", {"run", "check"}},
      {"counterexample", {"run", "counterexample"}},
      {"train", {"run", "data", "model", "train"}},
      {"eval", {"run", "data", "eval"}},
      {"rollout", {"run", "data", "rollout"}},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

namespace {

std::shared_ptr<const FlowSet> named_flow_set(const std::string& name) {
  auto radius = [&](std::size_t prefix) {
    const std::string digits = name.substr(prefix);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      throw ConfigError("bad flow set '" + name + "'");
    }
    return std::stoi(digits);
  };
  if (name == "zero") return std::make_shared<const FlowSet>(singleton_flow_set());
  if (name.rfind("vt", 0) == 0) {
    return std::make_shared<const FlowSet>(build_translation_flow_set(radius(2)));
  }
  if (name.rfind("rot", 0) == 0) {
    return std::make_shared<const FlowSet>(build_rotation_flow_set(radius(3)));
  }
  throw ConfigError("unknown flow set '" + name + "' (expected zero, vt<N>, rot<N>)");
}

}  // namespace

std::shared_ptr<const FlowSet> parse_flow_set_spec(const std::string& spec) {
  const auto dash = spec.find('-');
  if (dash == std::string::npos) return named_flow_set(spec);
  const auto whole = named_flow_set(spec.substr(0, dash));
  const auto removed = named_flow_set(spec.substr(dash + 1));
  std::vector<FlowGenerator> keep;
  for (const auto& g : whole->generators()) {
    if (!removed->contains(g)) keep.push_back(g);
  }
  if (keep.empty()) throw ConfigError("flow set '" + spec + "' is empty");
  return std::make_shared<const FlowSet>(FlowSet(std::move(keep)));
}

namespace {

GroupKind parse_group(const std::string& s) {
  if (s == "translation") return GroupKind::translation;
  if (s == "roto_translation") return GroupKind::roto_translation;
  throw ConfigError("group must be translation or roto_translation, got '" + s + "'");
}

Truncation parse_truncation(const std::string& s) {
  if (s == "drop") return Truncation::drop;
  if (s == "wrap") return Truncation::wrap;
  throw ConfigError("truncation must be drop or wrap, got '" + s + "'");
}

RolloutMode parse_mode(const std::string& s) {
  if (s == "teacher_forced") return RolloutMode::teacher_forced;
  if (s == "autoregressive") return RolloutMode::autoregressive;
  throw ConfigError("mode must be teacher_forced or autoregressive, got '" + s + "'");
}

std::string mode_name(RolloutMode m) {
  return m == RolloutMode::teacher_forced ? "teacher_forced" : "autoregressive";
}

int positive(const RunConfig& cfg, const std::string& section, const std::string& key) {
  const auto v = cfg.integer(section, key);
  if (v < 1 || v > 1'000'000'000) throw ConfigError(section + "." + key + " must be >= 1");
  return static_cast<int>(v);
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path out = cfg.str("run", "out");
  fs::create_directories(out);
  write_text(out / ("resolved_" + cfg.command() + ".ini"), cfg.echo());
  return out;
}

std::uint64_t run_seed(const RunConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.integer("run", "seed"));
}

int run_threads(const RunConfig& cfg) { return positive(cfg, "run", "threads"); }

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

json generator_json(const FlowGenerator& nu) {
  return {{"label", to_string(nu)}, {"vx", nu.velocity.x}, {"vy", nu.velocity.y},
          {"angular", nu.angular}};
}

json flow_set_json(const FlowSet& v) {
  json out = json::array();
  for (const auto& g : v.generators()) out.push_back(to_string(g));
  return out;
}

std::vector<double> plane_values(const GroupSignal& h) {
  const auto p = h.plane(0, 0);
  return {p.begin(), p.end()};
}

std::vector<double> channel_values(const Signal& s, int k) {
  const auto c = s.channel(k);
  return {c.begin(), c.end()};
}

std::vector<double> steps_axis(std::size_t n, double first = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = first + static_cast<double>(i);
  return x;
}

double curve_max(const std::vector<double>& c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, v);
  return m;
}

void require_window(int warmup, int horizon, int length, RolloutMode mode) {
  if (warmup < 1 || horizon < 1) throw ConfigError("warmup and horizon must be >= 1");
  // Targets always need frames up to warmup + horizon - 1.
  if (warmup + horizon > length) {
    throw ConfigError("warmup + horizon = " + std::to_string(warmup + horizon) +
                      " exceeds the sequence length " + std::to_string(length) + " (" +
                      mode_name(mode) + ")");
  }
}

const std::vector<FlowSample>& split_samples(const LoadedDataset& ds, Split s) {
  switch (s) {
    case Split::train: return ds.train;
    case Split::val: return ds.val;
    case Split::test: return ds.test;
  }
  return ds.test;
}

fs::path checkpoint_path(const RunConfig& cfg, const std::string& section) {
  const std::string c = cfg.str(section, "checkpoint");
  return c.empty() ? fs::path(cfg.str("run", "out")) / "model.fmdl" : fs::path(c);
}

}  // namespace

// ---------------------------------------------------------------------------
// gen-data

int run_gen_data(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  FlowDatasetConfig dc;
  dc.grid = Grid(positive(cfg, "data", "height"), positive(cfg, "data", "width"));
  dc.length = positive(cfg, "data", "length");
  dc.train_flows = parse_flow_set_spec(cfg.str("data", "train_flows"));
  dc.val_flows = parse_flow_set_spec(cfg.str("data", "val_flows"));
  dc.test_flows = parse_flow_set_spec(cfg.str("data", "test_flows"));
  dc.sprites_per_sequence = positive(cfg, "data", "sprites");
  dc.train_count = positive(cfg, "data", "train_count");
  dc.val_count = positive(cfg, "data", "val_count");
  dc.test_count = positive(cfg, "data", "test_count");
  dc.sprite_count = positive(cfg, "data", "sprite_count");
  dc.sprite_size = positive(cfg, "data", "sprite_size");
  dc.sprite_kind = parse_sprite_kind(cfg.str("data", "sprite_kind"));
  dc.seed = run_seed(cfg);
  dc.validate();

  const auto train = gen_flowing_sprites(dc, Split::train);
  const auto val = gen_flowing_sprites(dc, Split::val);
  const auto test = gen_flowing_sprites(dc, Split::test);
  const fs::path dir = cfg.str("data", "dir");
  save_dataset(dir, dc, train, val, test);

  CsvWriter index(out / "dataset_index.csv", {"split", "index", "flows", "sprite_ids"});
  json splits = json::object();
  for (Split s : {Split::train, Split::val, Split::test}) {
    const auto& samples = s == Split::train ? train : (s == Split::val ? val : test);
    const FlowSet& order = *dc.flows(s);
    std::vector<std::size_t> hist(order.size(), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::string flows, ids;
      for (std::size_t k = 0; k < samples[i].meta.flows.size(); ++k) {
        if (k > 0) flows += ';', ids += ';';
        flows += to_string(samples[i].meta.flows[k]);
        ids += std::to_string(samples[i].meta.sprite_ids[k]);
        ++hist[order.index_of(samples[i].meta.flows[k])];
      }
      index.row({to_string(s), std::to_string(i), flows, ids});
    }
    json h = json::array();
    for (std::size_t g = 0; g < order.size(); ++g) {
      h.push_back({{"nu", to_string(order[g])}, {"count", hist[g]}});
    }
    splits[to_string(s)] = {{"count", samples.size()}, {"flows", flow_set_json(order)},
                            {"histogram", h}};
  }
  write_json(out / "dataset_report.json",
             {{"command", "gen-data"},
              {"dir", dir.string()},
              {"seed", dc.seed},
              {"grid", {{"height", dc.grid.height}, {"width", dc.grid.width}}},
              {"length", dc.length},
              {"sprites_per_sequence", dc.sprites_per_sequence},
              {"splits", splits}});
  std::cout << "wrote " << train.size() << "/" << val.size() << "/" << test.size()
            << " train/val/test sequences to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check-equivariance

int run_check_equivariance(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const std::string family = cfg.str("check", "family");
  if (family != "grnn" && family != "fernn" && family != "fernn-nontrivial") {
    throw ConfigError("check.family must be grnn, fernn or fernn-nontrivial");
  }
  const auto flows = parse_flow_set_spec(cfg.str("check", "flow_set"));
  const GroupKind group = parse_group(cfg.str("check", "group"));
  const Grid grid(positive(cfg, "check", "height"), positive(cfg, "check", "width"));
  const int length = positive(cfg, "check", "length");
  const int trials = positive(cfg, "check", "trials");
  const int hidden = positive(cfg, "check", "hidden");
  const std::string kernels = cfg.str("check", "kernels");
  const std::string mapping_key = cfg.str("check", "mapping");
  const double tol = cfg.real("check", "tolerance");
  const bool expect_failure = cfg.flag("check", "expect_failure");
  if (kernels != "random" && kernels != "constant" && kernels != "zero_recurrent") {
    throw ConfigError("check.kernels must be random, constant or zero_recurrent");
  }
  if (kernels == "constant" && (grid.height % 2 == 0 || grid.width % 2 == 0)) {
    throw ConfigError("constant kernels span the whole grid and need odd height and width");
  }
  if ((group == GroupKind::roto_translation || flows->has_rotation()) && !grid.is_square()) {
    throw ConfigError("rotations need a square grid");
  }

  ModelSpec spec;
  spec.family = family == "grnn" ? ModelFamily::grnn : ModelFamily::fernn;
  spec.flow_set = flows;
  spec.lift_mode = family == "fernn-nontrivial" ? LiftMode::nontrivial : LiftMode::trivial;
  spec.group = group;
  spec.hidden_channels = hidden;
  spec.decoder_hidden = {};
  spec.sigma = parse_nonlinearity(cfg.str("check", "sigma"));

  const std::uint64_t seed = run_seed(cfg);
  CsvWriter csv(out / "check_residuals.csv", {"property", "trial", "nu_hat", "t", "residual"});
  json results = json::array();
  double max_flow = 0.0, max_static = 0.0;
  std::vector<double> worst_flow(static_cast<std::size_t>(length), 0.0);
  std::vector<double> worst_static(static_cast<std::size_t>(length), 0.0);
  std::string mapping_used;

  for (int trial = 0; trial < trials; ++trial) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(trial), std::uint64_t{0xC4ECC}};
    std::mt19937_64 rng(seq);
    Model m = init_model(spec, rng());
    const int rot = m.rotations();
    if (kernels == "constant") {
      m.core.input = Kernel::constant(hidden, 1, grid.height, grid.width, 0.05 + 0.25 * u01(rng));
      m.core.recurrent = VKernel::delta(Kernel::constant(hidden, hidden, grid.height, grid.width,
                                                         0.002 + 0.01 * u01(rng), rot));
    } else if (kernels == "zero_recurrent") {
      for (double& w : m.core.recurrent.base.values()) w = 0.0;
    }
    std::vector<Signal> frames;
    for (int t = 0; t < length; ++t) {
      Signal s(grid, 1);
      for (double& v : s.values()) v = u01(rng);
      frames.push_back(std::move(s));
    }
    const SpaceTimeSignal f(std::move(frames));
    const FlowGenerator nu_hat = (*flows)[static_cast<std::size_t>(rng() % flows->size())];
    const FlowMapping mapping = mapping_key == "auto"
                                    ? (kernels == "constant" ? FlowMapping::invariance
                                                             : natural_mapping(m))
                                    : parse_flow_mapping(mapping_key);
    mapping_used = to_string(mapping);

    // The static element must commute with every flow of the model: rotation
    // flows only admit rotations about the pivot, translation flows only
    // translations unless the model is a plain G-RNN.
    const FlowSet& model_flows = *m.core.flow_set;
    const bool any_flow = model_flows.size() == 1 && model_flows[0].is_zero();
    GroupElement g;
    if (any_flow || !model_flows.has_rotation()) {
      g = GroupElement::translate(static_cast<std::int64_t>(rng() % grid.height),
                                  static_cast<std::int64_t>(rng() % grid.width));
    }
    if (group == GroupKind::roto_translation && (any_flow || model_flows.has_rotation())) {
      g = g * GroupElement::rotate(static_cast<int>(rng() % 4));
    }

    const auto flow_curve = flow_residual_curve(m, f, nu_hat, mapping);
    const auto static_curve = static_residual_curve(m, f, g);
    for (const auto& [name, curve, worst] :
         {std::tuple{std::string("flow"), &flow_curve, &worst_flow},
          std::tuple{std::string("static"), &static_curve, &worst_static}}) {
      for (std::size_t t = 0; t < curve->size(); ++t) {
        csv.row({name, std::to_string(trial), name == "flow" ? to_string(nu_hat) : "",
                 std::to_string(t + 1), fmt((*curve)[t])});
        (*worst)[t] = std::max((*worst)[t], (*curve)[t]);
      }
      json r = {{"property", name}, {"trial", trial}, {"max_residual", curve_max(*curve)},
                {"curve", *curve}};
      if (name == "flow") r["nu_hat"] = generator_json(nu_hat);
      results.push_back(r);
    }
    max_flow = std::max(max_flow, curve_max(flow_curve));
    max_static = std::max(max_static, curve_max(static_curve));
  }

  const bool within = max_flow <= tol && max_static <= tol;
  const bool ok = expect_failure ? !within : within;
  const int code = ok ? kExitOk : kExitCheckFailed;
  write_json(out / "check_report.json",
             {{"command", "check-equivariance"},
              {"family", family},
              {"flow_set", flow_set_json(*flows)},
              {"group", cfg.str("check", "group")},
              {"grid", {{"height", grid.height}, {"width", grid.width}}},
              {"length", length},
              {"trials", trials},
              {"kernels", kernels},
              {"mapping", mapping_used},
              {"tolerance", tol},
              {"expect_failure", expect_failure},
              {"max_residual", {{"flow", max_flow}, {"static", max_static}}},
              {"within_tolerance", within},
              {"exit_code", code},
              {"results", results}});
  write_text(out / "check_residuals.svg",
             svg_line_plot("max residual over trials", "t", "residual",
                           {{"flow (" + mapping_used + ")", steps_axis(worst_flow.size()),
                             worst_flow},
                            {"static", steps_axis(worst_static.size()), worst_static}},
                           false));
  std::printf("flow residual max %.3e, static residual max %.3e, tolerance %.1e: %s%s\n",
              max_flow, max_static, tol, within ? "within" : "exceeded",
              expect_failure ? " (failure expected)" : "");
  return code;
}

// ---------------------------------------------------------------------------
// counterexample

int run_counterexample(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const Grid grid(positive(cfg, "counterexample", "height"),
                  positive(cfg, "counterexample", "width"));
  const int length = positive(cfg, "counterexample", "length");
  const auto v = cfg.int_list("counterexample", "velocity");
  if (v.size() != 2) throw ConfigError("counterexample.velocity must be vx,vy");
  const double amplitude = cfg.real("counterexample", "amplitude");
  if (!(amplitude > 0.0)) throw ConfigError("counterexample.amplitude must be > 0");
  const std::string shape_key = cfg.str("counterexample", "shape");
  if (shape_key != "delta" && shape_key != "gaussian") {
    throw ConfigError("counterexample.shape must be delta or gaussian");
  }
  const BumpShape shape = shape_key == "delta" ? BumpShape::delta : BumpShape::gaussian;
  const auto flows = parse_flow_set_spec(cfg.str("counterexample", "flow_set"));
  const FlowGenerator nu_hat = FlowGenerator::translation(v[0], v[1]);
  if (!flows->contains(nu_hat)) {
    throw ConfigError("velocity " + to_string(nu_hat) + " is not in the comparison flow set");
  }

  // h_{t+1} = h_t + f_t: identity kernels, no nonlinearity, one channel.
  auto accumulate = [&](ModelFamily family) {
    ModelSpec spec;
    spec.family = family;
    spec.flow_set = flows;
    spec.hidden_channels = 1;
    spec.kernel_size = 1;
    spec.decoder_hidden = {};
    spec.decoder_kernel_size = 1;
    spec.sigma = Nonlinearity::identity;
    Model m = init_model(spec, 0);
    m.core.input = Kernel::delta(1);
    m.core.recurrent = VKernel::delta(Kernel::delta(1));
    return m;
  };
  const Model grnn = accumulate(ModelFamily::grnn);
  const Model fernn = accumulate(ModelFamily::fernn);

  const SpaceTimeSignal still = gen_bump_sequence(grid, FlowGenerator::zero(), length, amplitude,
                                                  shape);
  const SpaceTimeSignal moving = apply_flow_to_sequence(still, nu_hat);
  const auto g_curve = flow_residual_curve(grnn, still, nu_hat, FlowMapping::frame);
  const auto f_curve = flow_residual_curve(fernn, still, nu_hat, FlowMapping::trivial_lift);
  const auto static_curve =
      flow_residual_curve(grnn, still, FlowGenerator::zero(), FlowMapping::frame);

  CsvWriter csv(out / "counterexample_residuals.csv",
                {"t", "grnn_static", "grnn_flow", "fernn_flow"});
  for (std::size_t t = 0; t < g_curve.size(); ++t) {
    csv.row({std::to_string(t + 1), fmt(static_curve[t]), fmt(g_curve[t]), fmt(f_curve[t])});
  }
  bool increasing = true;
  for (std::size_t t = 1; t < std::min<std::size_t>(g_curve.size(), 5); ++t) {
    increasing = increasing && g_curve[t] > g_curve[t - 1];
  }

  const auto h_still = hidden_trajectory(grnn, still);
  const auto h_moving = hidden_trajectory(grnn, moving);
  const auto h_fernn = hidden_trajectory(fernn, moving);
  const std::size_t slice = fernn.core.flow_set->index_of(nu_hat);
  std::vector<HeatmapPanel> panels;
  auto add_row = [&](const std::string& label, auto&& values_at) {
    for (int t = 1; t <= length; ++t) {
      panels.push_back({label + " t=" + std::to_string(t), grid.height, grid.width,
                        values_at(static_cast<std::size_t>(t - 1), t)});
    }
  };
  add_row("G-RNN static", [&](std::size_t i, int) { return plane_values(h_still[i][0]); });
  add_row("G-RNN flowing", [&](std::size_t i, int) { return plane_values(h_moving[i][0]); });
  add_row("moved static", [&](std::size_t i, int t) {
    return plane_values(act(flow_element(nu_hat, t - 1), h_still[i][0]));
  });
  add_row("FERNN slice " + to_string(nu_hat),
          [&](std::size_t i, int) { return plane_values(h_fernn[i][slice]); });
  write_text(out / "counterexample_hidden.svg", svg_heatmaps(panels, length, true));
  write_text(out / "counterexample_residuals.svg",
             svg_line_plot("flow residual for velocity " + to_string(nu_hat), "t", "max |residual|",
                           {{"G-RNN", steps_axis(g_curve.size()), g_curve},
                            {"FERNN", steps_axis(f_curve.size()), f_curve},
                            {"G-RNN, static input", steps_axis(static_curve.size()), static_curve}},
                           false));
  write_json(out / "counterexample_report.json",
             {{"command", "counterexample"},
              {"velocity", generator_json(nu_hat)},
              {"grid", {{"height", grid.height}, {"width", grid.width}}},
              {"length", length},
              {"amplitude", amplitude},
              {"shape", shape_key},
              {"flow_set", flow_set_json(*flows)},
              {"grnn_flow_residual", g_curve},
              {"grnn_static_residual", static_curve},
              {"fernn_flow_residual", f_curve},
              {"grnn_residual_increasing", increasing}});
  std::printf("G-RNN flow residual at t=%d: %.6g; FERNN: %.3e\n", length, g_curve.back(),
              curve_max(f_curve));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

namespace {

std::vector<std::string> velocity_columns(const FlowSet& order) {
  std::vector<std::string> cols;
  for (const auto& g : order.generators()) cols.push_back("mse" + to_string(g));
  return cols;
}

/// One CSV row: total plus the per-velocity means in `order` (blank when a
/// velocity never occurs).
std::vector<std::string> velocity_row(const std::vector<FlowSample>& samples,
                                      const std::vector<double>& per_seq, const FlowSet& order) {
  std::vector<std::string> cells(order.size());
  for (const auto& r : per_velocity_mse(samples, per_seq, order)) {
    cells[order.index_of(r.nu)] = fmt(r.mse);
  }
  return cells;
}

std::vector<double> totals(const EvalResult& ev) {
  std::vector<double> v;
  for (const auto& r : ev.per_sequence) v.push_back(r.total_mse);
  return v;
}

}  // namespace

int run_train(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const LoadedDataset ds = load_dataset(cfg.str("data", "dir"));
  if (ds.train.empty()) throw ConfigError("dataset has no training sequences");

  ModelSpec spec;
  spec.family = parse_model_family(cfg.str("model", "family"));
  spec.flow_set = parse_flow_set_spec(cfg.str("model", "flow_set"));
  spec.lift_mode = parse_lift_mode(cfg.str("model", "lift"));
  spec.group = parse_group(cfg.str("model", "group"));
  spec.data_channels = ds.train.front().frames.channels();
  spec.hidden_channels = positive(cfg, "model", "hidden");
  spec.kernel_size = positive(cfg, "model", "kernel");
  spec.decoder_hidden = cfg.int_list("model", "decoder_hidden");
  spec.decoder_kernel_size = positive(cfg, "model", "decoder_kernel");
  spec.sigma = parse_nonlinearity(cfg.str("model", "sigma"));
  spec.readout = parse_readout(cfg.str("model", "readout"));
  spec.full_profile = cfg.flag("model", "full_profile");
  spec.truncation = parse_truncation(cfg.str("model", "truncation"));
  spec.recurrent_gain = cfg.real("model", "recurrent_gain");

  TrainConfig tc;
  tc.optimizer = parse_optimizer(cfg.str("train", "optimizer"));
  tc.lr = cfg.real("train", "lr");
  tc.steps = static_cast<int>(cfg.integer("train", "steps"));
  tc.batch = positive(cfg, "train", "batch");
  tc.grad_clip = cfg.real("train", "grad_clip");
  tc.beta1 = cfg.real("train", "beta1");
  tc.beta2 = cfg.real("train", "beta2");
  tc.warmup = positive(cfg, "train", "warmup");
  tc.horizon = positive(cfg, "train", "horizon");
  tc.eval_every = static_cast<int>(cfg.integer("train", "eval_every"));
  tc.seed = run_seed(cfg);
  tc.threads = run_threads(cfg);
  const auto log_every = cfg.integer("train", "log_every");
  require_window(tc.warmup, tc.horizon, ds.config.length, RolloutMode::teacher_forced);

  const Model init = init_model(spec, tc.seed);
  const auto train_frames = frames_of(ds.train);
  const auto val_frames = frames_of(ds.val);
  const TrainResult res = train(init, train_frames, val_frames, tc, [&](const TrainRecord& r) {
    if (log_every > 0 && r.step % log_every == 0) {
      std::fprintf(stderr, "step %d train_mse %.6g grad_norm %.4g\n", r.step, r.train_mse,
                   r.grad_norm);
    }
    return true;
  });
  save_model(out / "model.fmdl", res.model);

  {
    CsvWriter curve(out / "loss_curve.csv", {"step", "split", "total_mse", "grad_norm"});
    std::size_t vi = 0;
    for (const auto& r : res.curve) {
      curve.row({std::to_string(r.step), "train", fmt(r.train_mse), fmt(r.grad_norm)});
      while (vi < res.validation.size() && res.validation[vi].step <= r.step) {
        curve.row({std::to_string(res.validation[vi].step), "val",
                   fmt(res.validation[vi].report.total_mse), ""});
        ++vi;
      }
    }
    for (; vi < res.validation.size(); ++vi) {
      curve.row({std::to_string(res.validation[vi].step), "val",
                 fmt(res.validation[vi].report.total_mse), ""});
    }
  }

  // Final teacher-forced metrics per split, with per-velocity columns.
  const int threads = tc.threads;
  json finals = json::object();
  {
    std::shared_ptr<const FlowSet> all = ds.config.train_flows;
    std::vector<FlowGenerator> union_gens = all->generators();
    for (const auto& s : {ds.config.val_flows, ds.config.test_flows}) {
      for (const auto& g : s->generators()) {
        if (std::find(union_gens.begin(), union_gens.end(), g) == union_gens.end()) {
          union_gens.push_back(g);
        }
      }
    }
    const FlowSet order(union_gens);
    std::vector<std::string> header = {"step", "split", "total_mse"};
    for (auto& c : velocity_columns(order)) header.push_back(c);
    CsvWriter fin(out / "final_metrics.csv", header);
    for (Split s : {Split::train, Split::val, Split::test}) {
      const auto& samples = split_samples(ds, s);
      if (samples.empty()) continue;
      const auto frames = frames_of(samples);
      const EvalResult ev = evaluate(res.model, frames, tc.warmup, tc.horizon,
                                     RolloutMode::teacher_forced, threads);
      std::vector<std::string> row = {std::to_string(res.curve.size()), to_string(s),
                                      fmt(ev.aggregate.total_mse)};
      for (auto& c : velocity_row(samples, totals(ev), order)) row.push_back(c);
      fin.row(row);
      finals[to_string(s)] = ev.aggregate.total_mse;
    }
  }

  std::vector<double> steps, mse, vsteps, vmse;
  for (const auto& r : res.curve) {
    steps.push_back(r.step);
    mse.push_back(r.train_mse);
  }
  for (const auto& r : res.validation) {
    vsteps.push_back(r.step);
    vmse.push_back(r.report.total_mse);
  }
  write_text(out / "loss_curve.svg",
             svg_line_plot("training loss", "step", "MSE",
                           {{"train", steps, mse}, {"val", vsteps, vmse}}, true));
  write_json(out / "train_report.json",
             {{"command", "train"},
              {"family", to_string(spec.family)},
              {"flow_set", spec.family == ModelFamily::fernn ? flow_set_json(*spec.flow_set)
                                                             : json::array()},
              {"lift", to_string(spec.lift_mode)},
              {"readout", to_string(spec.readout)},
              {"parameter_count", res.model.parameter_count()},
              {"steps_run", res.curve.size()},
              {"final_train_batch_mse", res.curve.empty() ? json(nullptr)
                                                          : json(res.curve.back().train_mse)},
              {"final_mse", finals},
              {"checkpoint", (out / "model.fmdl").string()}});
  std::printf("trained %zu steps, %zu parameters, test mse %s\n", res.curve.size(),
              res.model.parameter_count(),
              finals.contains("test") ? fmt(finals["test"].get<double>()).c_str() : "n/a");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const LoadedDataset ds = load_dataset(cfg.str("data", "dir"));
  const Model m = load_model(checkpoint_path(cfg, "eval"));
  const Split split = parse_split(cfg.str("eval", "split"));
  const int warmup = positive(cfg, "eval", "warmup");
  const int horizon = positive(cfg, "eval", "horizon");
  const RolloutMode mode = parse_mode(cfg.str("eval", "mode"));
  require_window(warmup, horizon, ds.config.length, mode);
  const auto& samples = split_samples(ds, split);
  if (samples.empty()) throw ConfigError("split " + to_string(split) + " is empty");
  const std::string seen_key = cfg.str("eval", "seen_flows");
  const auto seen = seen_key.empty() ? ds.config.train_flows : parse_flow_set_spec(seen_key);
  const FlowSet& order = *ds.config.flows(split);

  const auto frames = frames_of(samples);
  const EvalResult ev = evaluate(m, frames, warmup, horizon, mode, run_threads(cfg));
  const auto rows = per_velocity_mse(samples, totals(ev), order);

  std::vector<std::string> header = {"step", "split", "total_mse"};
  for (auto& c : velocity_columns(order)) header.push_back(c);
  {
    CsvWriter wide(out / "eval_metrics.csv", header);
    for (int s = 0; s < horizon; ++s) {
      std::vector<double> at_step;
      for (const auto& r : ev.per_sequence) at_step.push_back(r.per_step_mse[static_cast<std::size_t>(s)]);
      std::vector<std::string> row = {std::to_string(s + 1), to_string(split),
                                      fmt(ev.aggregate.per_step_mse[static_cast<std::size_t>(s)])};
      for (auto& c : velocity_row(samples, at_step, order)) row.push_back(c);
      wide.row(row);
    }
    std::vector<std::string> row = {"all", to_string(split), fmt(ev.aggregate.total_mse)};
    for (auto& c : velocity_row(samples, totals(ev), order)) row.push_back(c);
    wide.row(row);
  }

  double seen_sum = 0.0, unseen_sum = 0.0;
  int seen_n = 0, unseen_n = 0;
  json vel = json::array();
  {
    CsvWriter long_csv(out / "eval_per_velocity.csv",
                       {"nu", "vx", "vy", "angular", "seen", "count", "mse"});
    for (const auto& r : rows) {
      const bool is_seen = seen->contains(r.nu);
      long_csv.row({to_string(r.nu), std::to_string(r.nu.velocity.x),
                    std::to_string(r.nu.velocity.y), std::to_string(r.nu.angular),
                    is_seen ? "true" : "false", std::to_string(r.count), fmt(r.mse)});
      json j = generator_json(r.nu);
      j["seen"] = is_seen;
      j["count"] = r.count;
      j["mse"] = r.mse;
      vel.push_back(j);
      (is_seen ? seen_sum : unseen_sum) += r.mse;
      ++(is_seen ? seen_n : unseen_n);
    }
  }
  const json seen_mean = seen_n > 0 ? json(seen_sum / seen_n) : json(nullptr);
  const json unseen_mean = unseen_n > 0 ? json(unseen_sum / unseen_n) : json(nullptr);
  const json ratio = seen_n > 0 && unseen_n > 0 && seen_sum > 0.0
                         ? json((unseen_sum / unseen_n) / (seen_sum / seen_n))
                         : json(nullptr);
  const auto& ps = ev.aggregate.per_step_mse;
  write_json(out / "eval_report.json",
             {{"command", "eval"},
              {"checkpoint", checkpoint_path(cfg, "eval").string()},
              {"family", to_string(m.family)},
              {"parameter_count", m.parameter_count()},
              {"split", to_string(split)},
              {"mode", mode_name(mode)},
              {"warmup", warmup},
              {"horizon", horizon},
              {"sequences", samples.size()},
              {"total_mse", ev.aggregate.total_mse},
              {"per_step_mse", ps},
              {"per_velocity", vel},
              {"seen_mean_mse", seen_mean},
              {"unseen_mean_mse", unseen_mean},
              {"unseen_to_seen_ratio", ratio}});

  write_text(out / "eval_per_step.svg",
             svg_line_plot("per-step MSE (" + mode_name(mode) + ")", "prediction step", "MSE",
                           {{to_string(m.family), steps_axis(ps.size()), ps}}, true));
  // Translation tables become a (2R+1)² map indexed by velocity; anything
  // else becomes a strip in set order.
  std::int64_t radius = 0;
  bool translations = true;
  for (const auto& g : order.generators()) {
    translations = translations && g.angular == 0;
    radius = std::max({radius, std::abs(g.velocity.x), std::abs(g.velocity.y)});
  }
  HeatmapPanel panel{"per-velocity MSE", 1, static_cast<int>(order.size()),
                     std::vector<double>(order.size(), std::nan(""))};
  if (translations) {
    const int side = static_cast<int>(2 * radius + 1);
    panel = {"per-velocity MSE", side, side,
             std::vector<double>(static_cast<std::size_t>(side * side), std::nan(""))};
  }
  for (const auto& r : rows) {
    const std::size_t cell =
        translations ? static_cast<std::size_t>((r.nu.velocity.x + radius) * panel.cols +
                                                (r.nu.velocity.y + radius))
                     : order.index_of(r.nu);
    panel.values[cell] = r.mse;
  }
  write_text(out / "eval_per_velocity.svg", svg_heatmaps({panel}, 1, false));

  std::printf("%s %s mse %s", to_string(split).c_str(), mode_name(mode).c_str(),
              fmt(ev.aggregate.total_mse).c_str());
  if (!ratio.is_null()) std::printf(", unseen/seen %.3f", ratio.get<double>());
  std::printf("\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rollout

int run_rollout(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const LoadedDataset ds = load_dataset(cfg.str("data", "dir"));
  const Model m = load_model(checkpoint_path(cfg, "rollout"));
  const Split split = parse_split(cfg.str("rollout", "split"));
  const int warmup = positive(cfg, "rollout", "warmup");
  const int horizon = positive(cfg, "rollout", "horizon");
  const RolloutMode mode = parse_mode(cfg.str("rollout", "mode"));
  require_window(warmup, horizon, ds.config.length, mode);
  const auto& samples = split_samples(ds, split);
  const auto index = cfg.integer("rollout", "index");
  if (index < 0 || static_cast<std::size_t>(index) >= samples.size()) {
    throw ConfigError("rollout.index out of range for split " + to_string(split));
  }
  const FlowSample& sample = samples[static_cast<std::size_t>(index)];
  const SpaceTimeSignal pred = rollout(m, sample.frames, warmup, horizon, mode);
  const SpaceTimeSignal target = target_frames(sample.frames, warmup, horizon);
  const LossReport loss = mse_loss(pred, target);

  CsvWriter csv(out / "rollout.csv", {"step", "channel", "x", "y", "target", "prediction"});
  std::vector<HeatmapPanel> panels;
  const Grid& grid = target.grid();
  for (int s = 0; s < horizon; ++s) {
    const auto& tf = target[static_cast<std::size_t>(s)];
    const auto& pf = pred[static_cast<std::size_t>(s)];
    for (int k = 0; k < tf.channels(); ++k) {
      for (int x = 0; x < grid.height; ++x) {
        for (int y = 0; y < grid.width; ++y) {
          csv.row({std::to_string(s + 1), std::to_string(k), std::to_string(x), std::to_string(y),
                   fmt(tf.at(k, x, y)), fmt(pf.at(k, x, y))});
        }
      }
    }
  }
  for (int s = 0; s < horizon; ++s) {
    panels.push_back({"target " + std::to_string(s + 1), grid.height, grid.width,
                      channel_values(target[static_cast<std::size_t>(s)], 0)});
  }
  for (int s = 0; s < horizon; ++s) {
    panels.push_back({"prediction " + std::to_string(s + 1), grid.height, grid.width,
                      channel_values(pred[static_cast<std::size_t>(s)], 0)});
  }
  write_text(out / "rollout.svg", svg_heatmaps(panels, horizon, true));
  json flows = json::array();
  for (const auto& g : sample.meta.flows) flows.push_back(generator_json(g));
  write_json(out / "rollout_report.json",
             {{"command", "rollout"},
              {"checkpoint", checkpoint_path(cfg, "rollout").string()},
              {"split", to_string(split)},
              {"index", index},
              {"mode", mode_name(mode)},
              {"warmup", warmup},
              {"horizon", horizon},
              {"flows", flows},
              {"sprite_ids", sample.meta.sprite_ids},
              {"total_mse", loss.total_mse},
              {"per_step_mse", loss.per_step_mse}});
  std::printf("rollout %s[%lld] %s mse %s\n", to_string(split).c_str(),
              static_cast<long long>(index), mode_name(mode).c_str(),
              fmt(loss.total_mse).c_str());
  return kExitOk;
}

}  // namespace flowrnn::cli
