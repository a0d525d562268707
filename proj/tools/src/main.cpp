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

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"

extern char** environ;

namespace {

using flowrnn::cli::RunConfig;

struct CommonFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool expect_failure = false;
};

std::string keys_footer(const std::string& command) {
  std::string text = "Config keys ([section] key = default):\n";
  for (const auto& section : flowrnn::cli::command_sections(command)) {
    text += "  [" + section + "]\n";
    for (const auto& k : flowrnn::cli::key_registry()) {
      if (k.section != section) continue;
      text += "    " + k.key + " = " + k.default_value + "    " + k.help + "\n";
    }
  }
  text += "Every key can also be set with FLOWRNN_<SECTION>_<KEY> or --set section.key=value.";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowrnn: flow-equivariant recurrent networks on cyclic grids"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 configuration or runtime error, 2 equivariance check outside "
      "tolerance.\nTolerances: 1e-12 for exact equivariance claims (check.tolerance); 1e-5 "
      "relative error for gradient checks.");

  using Runner = std::function<int(const RunConfig&)>;
  const std::vector<std::tuple<std::string, std::string, Runner>> commands = {
      {"gen-data", "generate a flowing-sprites dataset", flowrnn::cli::run_gen_data},
      {"check-equivariance", "dual-rollout residual suite on random models",
       flowrnn::cli::run_check_equivariance},
      {"counterexample", "growing bump vs bump train for h_{t+1} = h_t + f_t",
       flowrnn::cli::run_counterexample},
      {"train", "train a G-RNN or FERNN next-frame predictor", flowrnn::cli::run_train},
      {"eval", "per-step and per-velocity MSE of a checkpoint", flowrnn::cli::run_eval},
      {"rollout", "predictions for one sequence as CSV and SVG", flowrnn::cli::run_rollout},
  };

  CommonFlags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help, run] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", flags.config, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--set", flags.overrides, "override section.key=value (repeatable)");
    sub->add_option("--seed", flags.seed, "same as run.seed");
    sub->add_option("--threads", flags.threads, "same as run.threads");
    sub->add_option("--out", flags.out, "same as run.out");
    if (name == "check-equivariance") {
      sub->add_flag("--expect-failure", flags.expect_failure, "same as check.expect_failure=true");
    }
    sub->footer(keys_footer(name));
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? flowrnn::cli::kExitOk : flowrnn::cli::kExitError;
  }

  for (const auto& [name, help, run] : commands) {
    if (!subs[name]->parsed()) continue;
    try {
      RunConfig cfg(name, flowrnn::cli::command_sections(name));
      if (!flags.config.empty()) cfg.load_file(flags.config);
      cfg.load_env(environ);
      for (const auto& o : flags.overrides) cfg.apply_override(o);
      if (flags.seed) cfg.set("run", "seed", std::to_string(*flags.seed));
      if (flags.threads) cfg.set("run", "threads", std::to_string(*flags.threads));
      if (flags.out) cfg.set("run", "out", *flags.out);
      if (flags.expect_failure) cfg.set("check", "expect_failure", "true");
      return run(cfg);
    } catch (const std::exception& e) {
      std::cerr << "flowrnn " << name << ": " << e.what() << "\n";
      return flowrnn::cli::kExitError;
    }
  }
  return flowrnn::cli::kExitError;
}
