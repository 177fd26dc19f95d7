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

#include "fedrank/fed_protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "fedrank/analysis.hpp"
#include "fedrank/errors.hpp"
#include "fedrank/parallel.hpp"
#include "fedrank/rng.hpp"

namespace fedrank {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

bool all_finite(const Weights& w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return std::isfinite(x); });
}

Weights aggregate(std::span<const ClientUpdate> updates, AggregationMode mode) {
  if (mode == AggregationMode::WeightedAverage) return weighted_average(updates);
  std::vector<SignVector> votes;
  votes.reserve(updates.size());
  for (const ClientUpdate& u : updates) votes.push_back(signs_of(u.gradient));
  const SignVector vote = sign_vote(votes);
  Weights out{};
  for (std::size_t i = 0; i < kNumWeights; ++i) out[i] = vote[i];
  return out;
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.num_clients_total == 0) throw ConfigError("num_clients_total must be >= 1");
  if (cfg.clients_per_iteration < 1 || cfg.clients_per_iteration > cfg.num_clients_total) {
    throw ConfigError("clients_per_iteration must lie in [1, num_clients_total]");
  }
  if (cfg.num_iterations < 0) throw ConfigError("num_iterations must be >= 0");
  if (!(cfg.loss.margin > 0.0)) throw ConfigError("loss.margin must be > 0");
  if (!(cfg.grad.epsilon > 0.0)) throw ConfigError("grad.epsilon must be > 0");
  if (!(cfg.constraints.max_step > 0.0)) throw ConfigError("constraints.max_step must be > 0");
  if (cfg.convergence.max_iterations < 0) throw ConfigError("convergence.max_iterations must be >= 0");
  if (cfg.convergence.patience < 1) throw ConfigError("convergence.patience must be >= 1");
  if (cfg.adaptive.min_updates < 1) throw ConfigError("adaptive.min_updates must be >= 1");
  try {
    validate(cfg.rprop);
    validate(cfg.client);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    if (!std::isfinite(cfg.initial[i]) || !std::isfinite(cfg.truth[i])) {
      throw ConfigError("initial and truth weights must be finite");
    }
  }
}

ServerState initial_state(const RunConfig& cfg) {
  ServerState s;
  s.iteration = 0;
  s.seed = cfg.seed;
  s.params = cfg.initial;
  s.rprop = RpropState::initial(cfg.rprop);
  return s;
}

ClientFn simulated_clients(const std::vector<ClientHistory>& pool, const LocalTraining& local) {
  return [&pool, local](ClientId id, const RoundRequest& request) -> std::optional<ClientUpdate> {
    if (id >= pool.size() || pool[id].client_id != id) {
      throw ProtocolError("unknown client " + std::to_string(id));
    }
    std::optional<ClientUpdate> update =
        client_round_update(pool[id], request.model, request.iteration, local);
    if (update && request.mode == AggregationMode::SignVote) {
      const SignVector s = signs_of(update->gradient);
      for (std::size_t i = 0; i < kNumWeights; ++i) update->gradient[i] = s[i];
    }
    return update;
  };
}

std::string snapshot_id(std::int64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06lld", static_cast<long long>(iteration));
  return buf;
}

Weights weighted_average(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw ProtocolError("cannot aggregate an empty set of updates");
  std::vector<const ClientUpdate*> ordered;
  ordered.reserve(updates.size());
  double total = 0.0;
  for (const ClientUpdate& u : updates) {
    if (u.iteration != updates.front().iteration) {
      throw ProtocolError("updates from different iterations cannot be aggregated");
    }
    if (u.n_examples == 0) throw ProtocolError("update with zero examples");
    ordered.push_back(&u);
    total += u.n_examples;
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ClientUpdate* a, const ClientUpdate* b) { return a->client_id < b->client_id; });
  Weights out{};
  for (const ClientUpdate* u : ordered) {
    const double w = u->n_examples / total;
    for (std::size_t i = 0; i < kNumWeights; ++i) out[i] += w * u->gradient[i];
  }
  return out;
}

bool close_iteration_adaptively(std::span<const ClientUpdate> pending, const AdaptiveConfig& cfg) {
  if (pending.empty() || pending.size() < cfg.min_updates) return false;
  Weights mean{};
  for (const ClientUpdate& u : pending) {
    for (std::size_t i = 0; i < kNumWeights; ++i) mean[i] += u.gradient[i];
  }
  for (double& m : mean) m /= static_cast<double>(pending.size());
  double dispersion = 0.0;
  for (const ClientUpdate& u : pending) dispersion += l1_distance(u.gradient, mean);
  dispersion /= static_cast<double>(pending.size());
  return dispersion < cfg.variance_threshold;
}

std::vector<std::size_t> sample_clients(std::size_t pool_size, std::size_t k, std::uint64_t seed,
                                        std::int64_t iteration) {
  if (k > pool_size) throw ProtocolError("cannot sample more clients than the pool holds");
  Rng rng(seed, Stream::kSampling, {static_cast<std::uint64_t>(iteration)});
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(pool_size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

RoundOutcome run_iteration(const ServerState& state, std::span<const ClientId> client_pool,
                           const ClientFn& clients, const RunConfig& cfg, unsigned threads) {
  const std::int64_t t = state.iteration;
  const std::vector<std::size_t> picks =
      sample_clients(client_pool.size(), cfg.clients_per_iteration, state.seed, t);

  const RoundRequest request{t, state.params, cfg.aggregation};
  std::vector<std::optional<ClientUpdate>> replies(picks.size());
  parallel_for(picks.size(), threads,
               [&](std::size_t slot) { replies[slot] = clients(client_pool[picks[slot]], request); });

  RoundOutcome out;
  out.state = state;
  IterationRecord& rec = out.record;
  rec.iteration = t;
  rec.snapshot_id = snapshot_id(t + 1);
  rec.num_selected = picks.size();

  // Replies are consumed in sampling order, which stands in for arrival order.
  for (std::optional<ClientUpdate>& reply : replies) {
    if (!reply) continue;
    if (reply->iteration != t) throw ProtocolError("client answered for the wrong iteration");
    if (reply->n_examples == 0) throw ProtocolError("client reported zero examples");
    if (!all_finite(reply->gradient)) continue;  // dropped like a lost report
    out.updates.push_back(std::move(*reply));
    if (cfg.adaptive.enabled && out.updates.size() < replies.size() &&
        close_iteration_adaptively(out.updates, cfg.adaptive)) {
      rec.closed_early = true;
      break;
    }
  }
  rec.num_updates = out.updates.size();

  std::vector<double> losses;
  losses.reserve(out.updates.size());
  for (const ClientUpdate& u : out.updates) losses.push_back(u.metrics.mean_loss);
  rec.mean_loss = losses.empty()
                      ? kNaN
                      : std::accumulate(losses.begin(), losses.end(), 0.0) / losses.size();
  rec.median_loss = median(std::move(losses));

  if (!out.updates.empty()) {
    rec.aggregated_update = aggregate(out.updates, cfg.aggregation);
    try {
      const RpropResult step =
          rprop_step(state.rprop, rec.aggregated_update, state.params, cfg.constraints);
      for (std::size_t i = 0; i < kNumWeights; ++i) {
        rec.raw_delta[i] = step.unprojected[i] - state.params[i];
        rec.applied_delta[i] = step.params[i] - state.params[i];
      }
      out.state.params = step.params;
      out.state.rprop = step.state;
      rec.stepped = true;
    } catch (const NumericalError&) {
      rec.stepped = false;
    }
  }
  rec.step_sizes = out.state.rprop.step_sizes;

  double norm = 0.0;
  for (double d : rec.applied_delta) norm = std::max(norm, std::abs(d));
  out.state.stall_count = norm < cfg.convergence.min_step_norm ? state.stall_count + 1 : 0;
  out.state.iteration = t + 1;
  return out;
}

RunRecord run_training(const RunConfig& cfg, std::span<const ClientId> client_pool,
                       const ClientFn& clients, RunObserver* observer, unsigned threads,
                       std::optional<ServerState> resume) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();
  ServerState state = resume ? *resume : initial_state(cfg);
  if (state.seed != cfg.seed) throw ConfigError("snapshot seed does not match the run seed");

  RunRecord record;
  record.seed = cfg.seed;
  record.initial_params = state.params;
  record.snapshot_ids.push_back(snapshot_id(state.iteration));
  if (observer) observer->on_start(state);

  auto keep_going = [&] {
    if (state.iteration >= cfg.num_iterations) return false;
    if (cfg.convergence.max_iterations > 0 && state.iteration >= cfg.convergence.max_iterations) {
      return false;
    }
    return state.stall_count < cfg.convergence.patience;
  };
  while (keep_going()) {
    RoundOutcome round = run_iteration(state, client_pool, clients, cfg, threads);
    state = std::move(round.state);
    record.snapshot_ids.push_back(round.record.snapshot_id);
    if (observer) observer->on_iteration(state, round.record, round.updates);
    record.iterations.push_back(std::move(round.record));
  }

  record.final_params = state.params;
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (observer) observer->on_finish(record);
  return record;
}

}  // namespace fedrank
