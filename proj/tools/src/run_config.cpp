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

#include "run_config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <sstream>

namespace flowrnn::cli {

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> keys = {
      {"run", "seed", "0", "global seed for init, shuffling and trial sampling"},
      {"run", "threads", "1", "worker threads; 1 is the bit-reproducible reference"},
      {"run", "out", "out", "output directory"},

      {"data", "dir", "data", "dataset directory (manifest.json + split folders)"},
      {"data", "height", "16", "grid rows"},
      {"data", "width", "16", "grid columns"},
      {"data", "length", "12", "frames per sequence"},
      {"data", "train_flows", "vt1", "flow set for the train split"},
      {"data", "val_flows", "vt1", "flow set for the val split"},
      {"data", "test_flows", "vt1", "flow set for the test split"},
      {"data", "sprites", "2", "sprites per sequence"},
      {"data", "train_count", "256", "train sequences"},
      {"data", "val_count", "32", "val sequences"},
      {"data", "test_count", "64", "test sequences"},
      {"data", "sprite_count", "32", "size of the procedural sprite bank"},
      {"data", "sprite_size", "7", "sprite side length (odd)"},
      {"data", "sprite_kind", "mixed", "gaussian | glyph | mixed"},

      {"model", "family", "fernn", "grnn | fernn"},
      {"model", "flow_set", "vt1", "flow set of a fernn"},
      {"model", "lift", "trivial", "trivial | nontrivial"},
      {"model", "group", "translation", "translation | roto_translation"},
      {"model", "hidden", "8", "hidden channels"},
      {"model", "kernel", "3", "input and recurrent kernel size"},
      {"model", "decoder_hidden", "8", "comma-separated hidden decoder widths (may be empty)"},
      {"model", "decoder_kernel", "3", "decoder kernel size"},
      {"model", "sigma", "relu", "relu | tanh | identity"},
      {"model", "readout", "advanced", "advanced | current"},
      {"model", "full_profile", "false", "learn a per-velocity recurrent profile"},
      {"model", "truncation", "drop", "drop | wrap"},
      {"model", "recurrent_gain", "0.5", "scale of the recurrent init bound"},

      {"train", "optimizer", "adam", "adam | sgd"},
      {"train", "lr", "1e-4", "learning rate"},
      {"train", "steps", "100", "optimizer steps"},
      {"train", "batch", "8", "sequences per step"},
      {"train", "grad_clip", "1.0", "global-norm clip; <= 0 disables"},
      {"train", "beta1", "0.9", "adam first-moment decay"},
      {"train", "beta2", "0.999", "adam second-moment decay"},
      {"train", "warmup", "6", "frames fed before the first prediction"},
      {"train", "horizon", "6", "predicted frames per sequence"},
      {"train", "eval_every", "0", "validation cadence in steps; 0 = only at the end"},
      {"train", "log_every", "10", "progress line cadence on stderr"},

      {"eval", "checkpoint", "", "model file; empty = <out>/model.fmdl"},
      {"eval", "split", "test", "train | val | test"},
      {"eval", "warmup", "6", "frames fed before the first prediction"},
      {"eval", "horizon", "6", "predicted frames"},
      {"eval", "mode", "teacher_forced", "teacher_forced | autoregressive"},
      {"eval", "seen_flows", "", "flow set marked as seen; empty = manifest train flows"},

      {"rollout", "checkpoint", "", "model file; empty = <out>/model.fmdl"},
      {"rollout", "split", "test", "train | val | test"},
      {"rollout", "index", "0", "sequence index within the split"},
      {"rollout", "warmup", "6", "frames fed before the first prediction"},
      {"rollout", "horizon", "6", "predicted frames"},
      {"rollout", "mode", "autoregressive", "teacher_forced | autoregressive"},

      {"check", "family", "fernn", "grnn | fernn | fernn-nontrivial"},
      {"check", "flow_set", "vt1", "flows to test; also the model's set for a fernn"},
      {"check", "group", "translation", "translation | roto_translation"},
      {"check", "height", "8", "grid rows"},
      {"check", "width", "8", "grid columns"},
      {"check", "length", "8", "sequence length T"},
      {"check", "trials", "50", "random (params, input, flow) trials"},
      {"check", "hidden", "4", "hidden channels"},
      {"check", "sigma", "identity", "relu | tanh | identity"},
      {"check", "kernels", "random", "random | constant | zero_recurrent"},
      {"check", "mapping", "auto", "auto | trivial_lift | nontrivial_lift | frame | invariance"},
      {"check", "tolerance", "1e-12", "max allowed residual"},
      {"check", "expect_failure", "false", "succeed only if some residual exceeds tolerance"},

      {"counterexample", "height", "12", "grid rows"},
      {"counterexample", "width", "12", "grid columns"},
      {"counterexample", "length", "6", "steps"},
      {"counterexample", "velocity", "1,0", "bump velocity vx,vy"},
      {"counterexample", "amplitude", "1.0", "bump height"},
      {"counterexample", "shape", "delta", "delta | gaussian"},
      {"counterexample", "flow_set", "vt1", "flow set of the comparison fernn"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

RunConfig::RunConfig(std::string command, std::vector<std::string> sections)
    : command_(std::move(command)), sections_(std::move(sections)) {
  for (const auto& k : key_registry()) {
    if (std::find(sections_.begin(), sections_.end(), k.section) == sections_.end()) continue;
    values_[{k.section, k.key}] = k.default_value;
    sources_[{k.section, k.key}] = "default";
  }
}

const KeySpec& RunConfig::spec(const std::string& section, const std::string& key) const {
  for (const auto& k : key_registry()) {
    if (k.section == section && k.key == key) return k;
  }
  throw ConfigError("unknown key '" + section + "." + key + "'");
}

bool RunConfig::uses(const std::string& section) const {
  return std::find(sections_.begin(), sections_.end(), section) != sections_.end();
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value,
                    const std::string& source) {
  spec(section, key);
  // Known keys of sections this command ignores are accepted so that one
  // file can drive a whole pipeline.
  if (!uses(section)) return;
  values_[{section, key}] = value;
  sources_[{section, key}] = source;
}

void RunConfig::load_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError("key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, node] : body) set(section, key, trim(node.data()), "file");
  }
}

void RunConfig::load_env(char** env) {
  if (env == nullptr) return;
  for (char** e = env; *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("FLOWRNN_", 0) != 0) continue;
    const auto eq = entry.find('=');
    const std::string name = entry.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : entry.substr(eq + 1);
    for (const auto& section : sections_) {
      const std::string prefix = "FLOWRNN_" + upper(section) + "_";
      if (name.rfind(prefix, 0) != 0) continue;
      std::string key = name.substr(prefix.size());
      for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      set(section, key, value, "env");
    }
  }
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  set(section, key, trim(assignment.substr(eq + 1)), "override");
}

std::string RunConfig::str(const std::string& section, const std::string& key) const {
  spec(section, key);
  if (!uses(section)) throw ConfigError("'" + command_ + "' does not read [" + section + "]");
  return values_.at({section, key});
}

std::int64_t RunConfig::integer(const std::string& section, const std::string& key) const {
  const std::string v = str(section, key);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(section + "." + key + " must be an integer, got '" + v + "'");
  }
  return out;
}

double RunConfig::real(const std::string& section, const std::string& key) const {
  const std::string v = str(section, key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(section + "." + key + " must be a number, got '" + v + "'");
}

bool RunConfig::flag(const std::string& section, const std::string& key) const {
  const std::string v = str(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(section + "." + key + " must be a boolean, got '" + v + "'");
}

std::vector<int> RunConfig::int_list(const std::string& section, const std::string& key) const {
  std::vector<int> out;
  std::stringstream ss(str(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(section + "." + key + " must be a comma-separated integer list");
    }
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "# resolved configuration for '" << command_ << "'\n";
  for (const auto& section : sections_) {
    os << "\n[" << section << "]\n";
    for (const auto& k : key_registry()) {
      if (k.section != section) continue;
      os << "; " << k.help << " [" << sources_.at({k.section, k.key}) << "]\n"
         << k.key << " = " << values_.at({k.section, k.key}) << "\n";
    }
  }
  return os.str();
}

}  // namespace flowrnn::cli
