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

#ifndef FLOWRNN_TOOLS_RUN_CONFIG_HPP_
#define FLOWRNN_TOOLS_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowrnn::cli {

/// Bad config file, unknown key or unparsable value. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string section;
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every key a command may read, in echo order.
const std::vector<KeySpec>& key_registry();

/// Resolved key/value configuration for one command invocation.
///
/// Layers, lowest to highest precedence: registry defaults, the INI file,
/// FLOWRNN_<SECTION>_<KEY> environment variables, --set overrides, then the
/// dedicated flags (--seed, --threads, --out). Keys missing from the registry
/// are rejected everywhere.
class RunConfig {
 public:
  RunConfig(std::string command, std::vector<std::string> sections);

  void load_file(const std::filesystem::path& path);
  /// Reads the process environment; `env` is usually `environ`.
  void load_env(char** env);
  /// "section.key=value".
  void apply_override(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value,
           const std::string& source = "flag");

  const std::string& command() const { return command_; }
  std::string str(const std::string& section, const std::string& key) const;
  std::int64_t integer(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  std::vector<int> int_list(const std::string& section, const std::string& key) const;

  /// INI text of every resolved key, each preceded by a comment with its help
  /// text and source. The echo is itself a valid config file.
  std::string echo() const;

 private:
  const KeySpec& spec(const std::string& section, const std::string& key) const;
  bool uses(const std::string& section) const;

  std::string command_;
  std::vector<std::string> sections_;
  std::map<std::pair<std::string, std::string>, std::string> values_;
  std::map<std::pair<std::string, std::string>, std::string> sources_;
};

}  // namespace flowrnn::cli

#endif  // FLOWRNN_TOOLS_RUN_CONFIG_HPP_
