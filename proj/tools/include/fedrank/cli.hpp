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

// Entry points of the fedrank command-line tool. Every subcommand is a plain
// function so tests can drive it in-process.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fedrank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct GenDataOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

struct TrainOptions {
  std::filesystem::path config;
  /// Run directory: snapshots/, updates.jsonl, iterations.jsonl, loss.csv.
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  /// Continue from this snapshot, appending to the logs in `out`.
  std::optional<std::filesystem::path> resume;
  /// Pool written by gen-data; regenerated from the config when absent.
  std::optional<std::filesystem::path> histories;
};

struct EvaluateOptions {
  std::filesystem::path config;
  std::filesystem::path snapshot;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<std::filesystem::path> histories;
};

struct StabilityOptions {
  std::filesystem::path log;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sample_size;
  std::optional<std::size_t> trials;
  unsigned threads = 0;
};

// Each command throws ConfigError before touching the file system when the
// configuration is unusable.
void cmd_gen_data(const GenDataOptions& opts, std::ostream& out);
void cmd_train(const TrainOptions& opts, std::ostream& out);
void cmd_evaluate(const EvaluateOptions& opts, std::ostream& out);
void cmd_stability(const StabilityOptions& opts, std::ostream& out);

/// Parses `args` (without the program name), dispatches, and maps errors to
/// exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedrank::cli
