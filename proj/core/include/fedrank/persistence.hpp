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

// On-disk formats.
//
//   snapshot      line-oriented "key value" text, tagged fedrank-snapshot/1.
//                 Doubles use the shortest decimal form that round-trips, so
//                 write -> read -> write is bit-exact.
//   update log    one JSON object per ClientUpdate per line.
//   histories     one JSON object per client per line.
//   CSV reports   loss curves, evaluation and stability tables.

#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedrank/analysis.hpp"
#include "fedrank/fed_protocol.hpp"
#include "fedrank/synth_clients.hpp"
#include "fedrank/update.hpp"

namespace fedrank {

inline constexpr std::string_view kSnapshotFormat = "fedrank-snapshot/1";

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite.
std::string format_double(double value);
/// Inverse of format_double. Throws IoError on malformed text.
double parse_double(std::string_view text);

std::string format_snapshot(const ServerState& state);
ServerState parse_snapshot(std::string_view text);
void write_snapshot(const std::filesystem::path& path, const ServerState& state);
ServerState read_snapshot(const std::filesystem::path& path);

std::string format_update(const ClientUpdate& update);
ClientUpdate parse_update(std::string_view line);
std::vector<ClientUpdate> read_update_log(const std::filesystem::path& path);

std::string format_history(const ClientHistory& history);
ClientHistory parse_history(std::string_view line);
void write_histories(const std::filesystem::path& path, std::span<const ClientHistory> pool);
std::vector<ClientHistory> read_histories(const std::filesystem::path& path);

std::string format_iteration(const IterationRecord& record);

/// iteration,mean_loss,median_loss,num_updates,rolling5_loss
std::string format_loss_csv(std::span<const IterationRecord> iterations);
/// arm,metric,mean,n,U,p,significant
std::string format_eval_csv(const EvalReport& report);
/// iteration,mean_l1,std_l1 for every subsampled iteration.
std::string format_stability_csv(const StabilityReport& report);

/// Writes `contents` to `path` via a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Persists a training run into a directory:
///   snapshots/snapshot_NNNNNN.txt  model after N rounds
///   updates.jsonl                  every received ClientUpdate
///   iterations.jsonl               one IterationRecord per round
///   loss.csv                       loss curve
/// Appends when resuming so a split run produces the same files as an
/// unbroken one.
class RunWriter : public RunObserver {
 public:
  RunWriter(std::filesystem::path out_dir, bool resume);

  void on_start(const ServerState& state) override;
  void on_iteration(const ServerState& state, const IterationRecord& record,
                    std::span<const ClientUpdate> updates) override;
  void on_finish(const RunRecord& record) override;

  std::filesystem::path snapshot_path(std::int64_t iteration) const;

 private:
  std::filesystem::path dir_;
  bool resume_;
  std::ofstream updates_;
  std::ofstream iterations_;
};

}  // namespace fedrank
