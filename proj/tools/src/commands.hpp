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

#ifndef FLOWRNN_TOOLS_COMMANDS_HPP_
#define FLOWRNN_TOOLS_COMMANDS_HPP_

#include <memory>
#include <string>
#include <vector>

#include "flowrnn/group_flow.hpp"
#include "run_config.hpp"

namespace flowrnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

/// Config sections read by each subcommand, in echo order.
std::vector<std::string> command_sections(const std::string& command);

/// Named flow sets: zero, vt<N>, rot<N>, and ring differences such as
/// vt2-vt1 (generators of the first set missing from the second).
std::shared_ptr<const FlowSet> parse_flow_set_spec(const std::string& spec);

// Each command writes resolved_<command>.ini into run.out and returns an exit code.
int run_gen_data(const RunConfig& cfg);
int run_check_equivariance(const RunConfig& cfg);
int run_counterexample(const RunConfig& cfg);
int run_train(const RunConfig& cfg);
int run_eval(const RunConfig& cfg);
int run_rollout(const RunConfig& cfg);

}  // namespace flowrnn::cli

#endif  // FLOWRNN_TOOLS_COMMANDS_HPP_
