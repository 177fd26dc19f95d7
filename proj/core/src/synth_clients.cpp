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

#include "fedrank/synth_clients.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <numeric>

#include "fedrank/errors.hpp"
#include "fedrank/parallel.hpp"

namespace fedrank {
namespace {

bool contains_ignore_case(std::string_view haystack, std::string_view needle) {
  const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                              [](char a, char b) {
                                return std::tolower(static_cast<unsigned char>(a)) ==
                                       std::tolower(static_cast<unsigned char>(b));
                              });
  return it != haystack.end();
}

VisitType draw_visit_type(const VisitTypeMix& mix, bool bookmarked, Rng& rng) {
  const double link = mix.followed_link + (bookmarked ? 0.0 : mix.bookmarked);
  const double bookmark = bookmarked ? mix.bookmarked : 0.0;
  const double total = link + mix.typed + bookmark + mix.other;
  double u = rng.uniform() * total;
  if ((u -= link) < 0.0) return VisitType::FollowedLink;
  if ((u -= mix.typed) < 0.0) return VisitType::Typed;
  if ((u -= bookmark) < 0.0) return VisitType::Bookmarked;
  return VisitType::Other;
}

std::size_t draw_target(const ClientHistory& client, std::span<const double> truth_scores,
                        TargetChoice choice, Rng& rng) {
  if (choice == TargetChoice::Uniform) return rng.below(client.pages.size());
  if (choice == TargetChoice::TruthWeighted) {
    const double total = std::accumulate(truth_scores.begin(), truth_scores.end(), 0.0);
    if (total > 0.0) {
      double pick = rng.uniform() * total;
      for (std::size_t i = 0; i < truth_scores.size(); ++i) {
        if ((pick -= truth_scores[i]) < 0.0) return i;
      }
      return truth_scores.size() - 1;
    }
  }
  std::uint64_t total = 0;
  for (const Page& p : client.pages) total += p.total_visit_count;
  if (total == 0) return rng.below(client.pages.size());
  std::uint64_t pick = rng.below(total);
  for (std::size_t i = 0; i < client.pages.size(); ++i) {
    if (pick < client.pages[i].total_visit_count) return i;
    pick -= client.pages[i].total_visit_count;
  }
  return client.pages.size() - 1;
}

std::vector<double> score_pages(const ClientHistory& client, const ModelParams& params) {
  std::vector<double> scores(client.pages.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = frecency(client.pages[i], params);
  return scores;
}

}  // namespace

void validate(const ClientConfig& cfg) {
  auto check_range = [](const IntRange& r, std::int64_t floor, const char* name) {
    if (r.min < floor || r.max < r.min) {
      throw InputError(std::string("invalid range for ") + name);
    }
  };
  check_range(cfg.pages_per_client, 1, "pages_per_client");
  check_range(cfg.searches_per_round, 0, "searches_per_round");
  if (!(cfg.visit_frequency_mean > 0.0)) throw InputError("visit_frequency_mean must be > 0");
  if (!(cfg.bookmark_fraction >= 0.0 && cfg.bookmark_fraction <= 1.0)) {
    throw InputError("bookmark_fraction must lie in [0, 1]");
  }
  if (!(cfg.click_noise_variance >= 0.0)) throw InputError("click_noise_variance must be >= 0");
  if (!(cfg.recency_mean_days > 0.0)) throw InputError("recency_mean_days must be > 0");
  if (!(cfg.recency_max_days > 0.0)) throw InputError("recency_max_days must be > 0");
  const VisitTypeMix& m = cfg.visit_types;
  for (double w : {m.followed_link, m.typed, m.bookmarked, m.other}) {
    if (!(w >= 0.0)) throw InputError("visit type frequencies must be >= 0");
  }
  if (!(m.followed_link + m.typed + m.other > 0.0)) {
    throw InputError("visit type frequencies must not all be zero");
  }
  if (cfg.display_limit == 0) throw InputError("display_limit must be >= 1");
}

std::string synthetic_url(std::size_t page_index, ClientId client_id) {
  return "https://site" + std::to_string(page_index) + ".example/" + std::to_string(client_id);
}

ClientHistory gen_history(ClientId client_id, const ClientConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed, Stream::kHistory, {client_id});
  ClientHistory history;
  history.client_id = client_id;
  history.stream_seed = derive_seed(seed, Stream::kRound, {client_id});

  const auto num_pages = static_cast<std::size_t>(cfg.pages_per_client.draw(rng));
  history.pages.reserve(num_pages);
  std::vector<double> ages;
  for (std::size_t i = 0; i < num_pages; ++i) {
    Page page;
    page.id = static_cast<std::uint32_t>(i);
    page.url = synthetic_url(i, client_id);
    const double draw = std::ceil(rng.exponential(cfg.visit_frequency_mean));
    page.total_visit_count = static_cast<std::uint32_t>(std::max(1.0, draw));
    page.bookmarked = rng.bernoulli(cfg.bookmark_fraction);

    ages.resize(page.total_visit_count);
    for (double& a : ages) a = rng.truncated_exponential(cfg.recency_mean_days, cfg.recency_max_days);
    const std::size_t kept = std::min<std::size_t>(ages.size(), kRecentVisitCap);
    std::partial_sort(ages.begin(), ages.begin() + static_cast<std::ptrdiff_t>(kept), ages.end());
    page.visits.reserve(kept);
    for (std::size_t v = 0; v < kept; ++v) {
      page.visits.push_back({ages[v], draw_visit_type(cfg.visit_types, page.bookmarked, rng)});
    }
    history.pages.push_back(std::move(page));
  }
  return history;
}

std::vector<ClientHistory> gen_pool(std::size_t count, const ClientConfig& cfg,
                                    std::uint64_t seed, unsigned threads) {
  validate(cfg);
  std::vector<ClientHistory> pool(count);
  parallel_for(count, threads, [&](std::size_t i) { pool[i] = gen_history(i, cfg, seed); });
  return pool;
}

std::size_t simulate_click(std::span<const double> truth_scores, double noise_variance, Rng& rng) {
  if (truth_scores.empty()) throw InputError("simulate_click needs at least one candidate");
  const double stddev = std::sqrt(noise_variance);
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t k = 0; k < truth_scores.size(); ++k) {
    const double value = truth_scores[k] + (stddev > 0.0 ? stddev * rng.normal() : 0.0);
    if (k == 0 || value > best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

std::size_t simulate_click(std::span<const Page> candidates, const ModelParams& truth,
                           double noise_variance, Rng& rng) {
  std::vector<double> scores(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) scores[k] = frecency(candidates[k], truth);
  return simulate_click(scores, noise_variance, rng);
}

std::vector<SearchEvent> simulate_search_round(const ClientHistory& client,
                                               std::span<const double> display_scores,
                                               std::span<const double> truth_scores,
                                               const ClientConfig& cfg, Rng& rng) {
  const std::size_t n = client.pages.size();
  if (display_scores.size() != n || truth_scores.size() != n) {
    throw InputError("score vectors must match the client's page count");
  }
  const auto searches = static_cast<std::size_t>(cfg.searches_per_round.draw(rng));
  std::vector<SearchEvent> events;
  if (n == 0) return events;
  events.reserve(searches);

  // Suggestion order: higher score first, then lower page id.
  auto ranks_before = [&](std::size_t a, std::size_t b) {
    if (display_scores[a] != display_scores[b]) return display_scores[a] > display_scores[b];
    return client.pages[a].id < client.pages[b].id;
  };

  std::vector<std::size_t> matched;
  std::vector<double> shown_truth;
  for (std::size_t s = 0; s < searches; ++s) {
    const std::size_t target = draw_target(client, truth_scores, cfg.target_choice, rng);
    const std::string& url = client.pages[target].url;
    matched.resize(n);
    std::iota(matched.begin(), matched.end(), std::size_t{0});

    bool clicked = false;
    for (std::size_t typed = 1; typed <= url.size() && !clicked; ++typed) {
      const std::string_view prefix(url.data(), typed);
      std::erase_if(matched, [&](std::size_t i) {
        return !contains_ignore_case(client.pages[i].url, prefix);
      });
      const auto ahead = std::count_if(matched.begin(), matched.end(),
                                       [&](std::size_t i) { return ranks_before(i, target); });
      if (static_cast<std::size_t>(ahead) >= cfg.display_limit) continue;

      const std::size_t shown = std::min(cfg.display_limit, matched.size());
      std::vector<std::size_t> display = matched;
      std::partial_sort(display.begin(), display.begin() + static_cast<std::ptrdiff_t>(shown),
                        display.end(), ranks_before);
      display.resize(shown);

      SearchEvent event;
      event.chars_typed = typed;
      event.query = std::string(prefix);
      event.candidates.reserve(shown);
      shown_truth.clear();
      for (std::size_t i : display) {
        event.candidates.push_back(client.pages[i]);
        shown_truth.push_back(truth_scores[i]);
      }
      event.selected_index = simulate_click(shown_truth, cfg.click_noise_variance, rng);
      events.push_back(std::move(event));
      clicked = true;
    }
    // The full URL matches only the target, so the loop always ends in a click.
    assert(clicked);
  }
  return events;
}

std::vector<SearchEvent> simulate_search_round(const ClientHistory& client,
                                               const ModelParams& model, const ModelParams& truth,
                                               const ClientConfig& cfg, Rng& rng) {
  const std::vector<double> display = score_pages(client, model);
  const std::vector<double> truth_scores = score_pages(client, truth);
  return simulate_search_round(client, display, truth_scores, cfg, rng);
}

Rng round_rng(const ClientHistory& client, std::int64_t iteration) {
  return Rng(client.stream_seed, Stream::kRound, {static_cast<std::uint64_t>(iteration)});
}

Rng evaluation_rng(const ClientHistory& client, std::int64_t round) {
  return Rng(client.stream_seed, Stream::kEvaluation, {static_cast<std::uint64_t>(round)});
}

ClientUpdate summarize_events(ClientId client_id, std::int64_t iteration,
                              std::span<const SearchEvent> events, const ModelParams& model,
                              const LossConfig& loss, const GradConfig& grad) {
  if (events.empty()) throw InputError("cannot summarize an empty batch of events");
  ClientUpdate update;
  update.client_id = client_id;
  update.iteration = iteration;
  update.n_examples = static_cast<std::uint32_t>(events.size());

  Weights sum{};
  double loss_sum = 0.0;
  for (const SearchEvent& event : events) {
    const LossFn fn = [&](const ModelParams& p) { return event_loss(p, event, loss); };
    const Weights g = approx_gradient(fn, model, grad);
    for (std::size_t k = 0; k < kNumWeights; ++k) sum[k] += g[k];
    loss_sum += event_loss(model, event, loss);
    update.metrics.chars_typed.push_back(static_cast<std::uint32_t>(event.chars_typed));
    update.metrics.selected_ranks.push_back(static_cast<std::uint32_t>(event.selected_index));
  }
  const auto n = static_cast<double>(events.size());
  for (std::size_t k = 0; k < kNumWeights; ++k) update.gradient[k] = sum[k] / n;
  update.metrics.mean_loss = loss_sum / n;
  return update;
}

std::optional<ClientUpdate> client_round_update(const ClientHistory& client,
                                                const ModelParams& model, std::int64_t iteration,
                                                const LocalTraining& cfg) {
  Rng rng = round_rng(client, iteration);
  const std::vector<SearchEvent> events =
      simulate_search_round(client, model, cfg.truth, cfg.client, rng);
  if (events.empty()) return std::nullopt;
  return summarize_events(client.client_id, iteration, events, model, cfg.loss, cfg.grad);
}

}  // namespace fedrank
