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

// Synthetic browsing histories and a simulated URL-bar user.
//
// Visit counts are exponential, visit ages are a truncated exponential skewed
// towards recent days, and visit types are drawn independently of both. The
// simulated user picks a target page, types its URL one character at a time
// until the target shows up in the suggestion list, and then clicks the
// suggestion whose ground-truth frecency plus Gaussian noise is largest.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedrank/blackbox_grad.hpp"
#include "fedrank/frecency.hpp"
#include "fedrank/ranking_loss.hpp"
#include "fedrank/rng.hpp"
#include "fedrank/update.hpp"

namespace fedrank {

/// Inclusive uniform integer range; min == max gives a fixed value.
struct IntRange {
  std::int64_t min = 0;
  std::int64_t max = 0;

  std::int64_t draw(Rng& rng) const { return rng.uniform_int(min, max); }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// How the simulated user picks the page they are looking for.
enum class TargetChoice {
  /// In proportion to the page's ground-truth frecency.
  TruthWeighted,
  /// In proportion to the page's total visit count.
  VisitWeighted,
  Uniform,
};

/// Relative frequencies of visit types. Bookmarked visits only occur on
/// bookmarked pages; on other pages that mass goes to FollowedLink.
struct VisitTypeMix {
  double followed_link = 0.55;
  double typed = 0.20;
  double bookmarked = 0.15;
  double other = 0.10;
};

struct ClientConfig {
  IntRange pages_per_client{30, 70};
  /// Mean of the exponential visit-count distribution.
  double visit_frequency_mean = 7.0;
  double bookmark_fraction = 0.15;
  double click_noise_variance = 30.0;
  double recency_mean_days = 20.0;
  double recency_max_days = 365.0;
  VisitTypeMix visit_types;
  IntRange searches_per_round{0, 4};
  std::size_t display_limit = 10;
  TargetChoice target_choice = TargetChoice::TruthWeighted;
};

/// Throws InputError on negative variances, fractions outside [0, 1], empty
/// ranges and similar.
void validate(const ClientConfig& cfg);

struct ClientHistory {
  ClientId client_id = 0;
  std::vector<Page> pages;
  /// Root of every random stream this client draws from after generation.
  std::uint64_t stream_seed = 0;

  friend bool operator==(const ClientHistory&, const ClientHistory&) = default;
};

std::string synthetic_url(std::size_t page_index, ClientId client_id);

/// Deterministic in (seed, client_id).
ClientHistory gen_history(ClientId client_id, const ClientConfig& cfg, std::uint64_t seed);

/// Clients 0..count-1.
std::vector<ClientHistory> gen_pool(std::size_t count, const ClientConfig& cfg,
                                    std::uint64_t seed, unsigned threads = 1);

/// argmax of truth_scores[k] + N(0, noise_variance); ties go to the lowest index.
std::size_t simulate_click(std::span<const double> truth_scores, double noise_variance, Rng& rng);
std::size_t simulate_click(std::span<const Page> candidates, const ModelParams& truth,
                           double noise_variance, Rng& rng);

/// A round of searches. `display_scores` orders the suggestion list (the model
/// being served), `truth_scores` drives the clicks. Both are indexed like
/// client.pages.
std::vector<SearchEvent> simulate_search_round(const ClientHistory& client,
                                               std::span<const double> display_scores,
                                               std::span<const double> truth_scores,
                                               const ClientConfig& cfg, Rng& rng);

std::vector<SearchEvent> simulate_search_round(const ClientHistory& client,
                                               const ModelParams& model, const ModelParams& truth,
                                               const ClientConfig& cfg, Rng& rng);

/// Per-client stream for a training round.
Rng round_rng(const ClientHistory& client, std::int64_t iteration);
/// Per-client stream for evaluation, disjoint from every training round.
Rng evaluation_rng(const ClientHistory& client, std::int64_t round);

/// Mean finite-difference gradient and metrics over a batch of events.
/// Throws InputError on an empty batch.
ClientUpdate summarize_events(ClientId client_id, std::int64_t iteration,
                              std::span<const SearchEvent> events, const ModelParams& model,
                              const LossConfig& loss, const GradConfig& grad);

struct LocalTraining {
  ModelParams truth = ModelParams::defaults();
  ClientConfig client;
  LossConfig loss;
  GradConfig grad;
};

/// One client's contribution to a round, or nullopt if it made no searches.
std::optional<ClientUpdate> client_round_update(const ClientHistory& client,
                                                const ModelParams& model, std::int64_t iteration,
                                                const LocalTraining& cfg);

}  // namespace fedrank
