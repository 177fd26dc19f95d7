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

// Server side of the federated training loop.
//
// Each round samples K distinct clients, hands them the current model, and
// aggregates whatever updates come back, either as an example-weighted mean
// of gradients or as a per-weight sign vote. The aggregate drives one Rprop
// step followed by the safeguard projection.
//
// The server never touches client data. Client computation is injected as a
// ClientFn, and the only thing crossing that boundary is a ClientUpdate.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedrank/blackbox_grad.hpp"
#include "fedrank/frecency.hpp"
#include "fedrank/ranking_loss.hpp"
#include "fedrank/rprop.hpp"
#include "fedrank/synth_clients.hpp"
#include "fedrank/update.hpp"

namespace fedrank {

enum class AggregationMode { WeightedAverage, SignVote };

struct ConvergenceConfig {
  /// Extra cap on rounds; 0 means num_iterations alone bounds the run.
  std::int64_t max_iterations = 0;
  /// Stop once the infinity norm of the applied parameter change stays below
  /// this for `patience` consecutive rounds. 0 disables the rule.
  double min_step_norm = 0.0;
  std::int64_t patience = 5;
};

struct AdaptiveConfig {
  bool enabled = false;
  double variance_threshold = 0.0;
  std::size_t min_updates = 1;
};

struct RunConfig {
  std::size_t num_clients_total = 1000;
  std::size_t clients_per_iteration = 100;
  std::int64_t num_iterations = 50;
  std::uint64_t seed = 1;
  AggregationMode aggregation = AggregationMode::WeightedAverage;
  LossConfig loss;
  GradConfig grad;
  RpropHyper rprop;
  ConstraintSpec constraints;
  ConvergenceConfig convergence;
  AdaptiveConfig adaptive;
  /// Starting model; the production defaults unless a perturbed start is given.
  ModelParams initial = ModelParams::defaults();
  /// Weights the simulated users click by.
  ModelParams truth = ModelParams::defaults();
  ClientConfig client;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const RunConfig& cfg);

struct ServerState {
  /// Number of completed rounds; the next round has this index.
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;
  ModelParams params;
  RpropState rprop;
  std::int64_t stall_count = 0;

  friend bool operator==(const ServerState&, const ServerState&) = default;
};

ServerState initial_state(const RunConfig& cfg);

/// What the server broadcasts at the start of a round.
struct RoundRequest {
  std::int64_t iteration = 0;
  ModelParams model;
  AggregationMode mode = AggregationMode::WeightedAverage;
};

/// Client-side computation. Returns nullopt when the client has nothing to
/// report this round.
using ClientFn = std::function<std::optional<ClientUpdate>(ClientId, const RoundRequest&)>;

/// Binds a simulated population to a ClientFn. The returned function holds a
/// reference to `pool`, which must outlive it.
ClientFn simulated_clients(const std::vector<ClientHistory>& pool, const LocalTraining& local);

std::string snapshot_id(std::int64_t iteration);

struct IterationRecord {
  std::int64_t iteration = 0;
  /// Snapshot holding the model after this round.
  std::string snapshot_id;
  std::size_t num_selected = 0;
  std::size_t num_updates = 0;
  bool closed_early = false;
  bool stepped = false;
  Weights aggregated_update{};
  /// NaN when no updates arrived.
  double mean_loss = 0.0;
  double median_loss = 0.0;
  /// Parameter change before projection.
  Weights raw_delta{};
  /// Parameter change actually applied.
  Weights applied_delta{};
  Weights step_sizes{};

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunRecord {
  std::uint64_t seed = 0;
  ModelParams initial_params;
  ModelParams final_params;
  std::vector<std::string> snapshot_ids;
  std::vector<IterationRecord> iterations;
  double wall_clock_seconds = 0.0;
};

/// Sum of (n_i / N) * H_i, accumulated in ascending client id order.
/// Throws ProtocolError on an empty list or mixed iterations.
Weights weighted_average(std::span<const ClientUpdate> updates);

/// Whether a round can close before all sampled clients have reported: at
/// least min_updates arrived and the mean L1 distance of the gradients to their
/// mean is below variance_threshold.
bool close_iteration_adaptively(std::span<const ClientUpdate> pending, const AdaptiveConfig& cfg);

/// K distinct positions into a pool of the given size, uniform, in draw order.
std::vector<std::size_t> sample_clients(std::size_t pool_size, std::size_t k, std::uint64_t seed,
                                        std::int64_t iteration);

struct RoundOutcome {
  ServerState state;
  IterationRecord record;
  /// Updates that entered aggregation, in arrival order.
  std::vector<ClientUpdate> updates;
};

RoundOutcome run_iteration(const ServerState& state, std::span<const ClientId> client_pool,
                           const ClientFn& clients, const RunConfig& cfg, unsigned threads = 1);

class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_start(const ServerState& state) = 0;
  virtual void on_iteration(const ServerState& state, const IterationRecord& record,
                            std::span<const ClientUpdate> updates) = 0;
  virtual void on_finish(const RunRecord& record) = 0;
};

/// Loops rounds until num_iterations, the iteration cap, or the step-norm
/// convergence rule. Starts from `resume` when given, else from
/// initial_state(cfg).
RunRecord run_training(const RunConfig& cfg, std::span<const ClientId> client_pool,
                       const ClientFn& clients, RunObserver* observer = nullptr,
                       unsigned threads = 1, std::optional<ServerState> resume = std::nullopt);

}  // namespace fedrank
