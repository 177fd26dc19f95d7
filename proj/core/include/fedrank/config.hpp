// Copyright 2026 The fedrank Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

// Experiment configuration files.
//
// One `key = value` pair per line; `#` starts a comment. Unknown keys,
// duplicate keys and unparsable values are rejected. Lists are comma
// separated. See README.md for the full key table.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fedrank/fed_protocol.hpp"

namespace fedrank {

struct EvalConfig {
  /// Evaluation rounds per client; every client searches in every round.
  std::int64_t rounds = 5;
  /// Daily score decay of the "control" arm.
  double decay_rate = 0.025;
  double alpha = 0.05;
  std::size_t num_comparisons = 6;
};

struct StabilityConfig {
  std::size_t sample_size = 2000;
  std::size_t trials = 50;
};

struct ExperimentConfig {
  RunConfig run;
  EvalConfig eval;
  StabilityConfig stability;
};

/// Throws ConfigError naming the line on any problem.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every recognised key, in documentation order.
std::vector<std::string> config_keys();

/// Renders a config in the file format; parse_config(format_config(c)) == c.
std::string format_config(const ExperimentConfig& cfg);

}  // namespace fedrank
