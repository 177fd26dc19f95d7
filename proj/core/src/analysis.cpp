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

#include "fedrank/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fedrank/errors.hpp"
#include "fedrank/fed_protocol.hpp"
#include "fedrank/parallel.hpp"
#include "fedrank/rng.hpp"

namespace fedrank {
namespace {

struct RankedPool {
  std::vector<double> ranks;  // midranks, pooled order: a then b
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

RankedPool midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> values;
  values.reserve(n);
  values.insert(values.end(), a.begin(), a.end());
  values.insert(values.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });

  RankedPool out;
  out.ranks.resize(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
    const auto t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

// Enumerates every way of assigning na of the pooled midranks to the first
// sample; the conditional permutation distribution handles ties for free.
double exact_p(const std::vector<double>& ranks, std::size_t na, double u_obs) {
  const std::size_t n = ranks.size();
  const double mu = static_cast<double>(na) * static_cast<double>(n - na) / 2.0;
  const double offset = static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
  const double observed = std::abs(u_obs - mu) - 1e-9;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
  std::size_t total = 0;
  std::size_t extreme = 0;
  // prev_permutation over a sorted-descending selector visits every subset once.
  do {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) rank_sum += ranks[i];
    }
    ++total;
    if (std::abs(rank_sum - offset - mu) >= observed) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double normal_p(double u, std::size_t na, std::size_t nb, double tie_term) {
  const auto n1 = static_cast<double>(na);
  const auto n2 = static_cast<double>(nb);
  const double n = n1 + n2;
  const double mu = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double l1_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("l1_distance: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d += std::abs(u[i] - v[i]);
  return d;
}

std::vector<double> rolling_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw InputError("rolling window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t begin = t + 1 > window ? t + 1 - window : 0;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = begin; k <= t; ++k) {
      if (std::isnan(series[k])) continue;
      sum += series[k];
      ++count;
    }
    out[t] = count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 PValueMethod method) {
  if (a.empty() || b.empty()) throw InputError("mann_whitney_u needs two nonempty samples");
  const RankedPool pooled = midranks(a, b);
  const auto na = static_cast<double>(a.size());
  const double rank_sum = std::accumulate(pooled.ranks.begin(),
                                          pooled.ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  MannWhitneyResult r;
  r.u = rank_sum - na * (na + 1.0) / 2.0;

  const bool small = a.size() <= kExactMaxSampleSize && b.size() <= kExactMaxSampleSize;
  if (method == PValueMethod::Exact && a.size() + b.size() > kExactMaxPooledSize) {
    throw InputError("exact Mann-Whitney p-values are limited to small samples");
  }
  const std::size_t n = a.size() + b.size();
  const double all_tied = static_cast<double>(n) * n * n - static_cast<double>(n);
  if (pooled.tie_term == all_tied) {
    r.p = 1.0;
  } else if (method == PValueMethod::Exact || (method == PValueMethod::Auto && small)) {
    r.p = exact_p(pooled.ranks, a.size(), r.u);
  } else {
    r.p = normal_p(r.u, a.size(), b.size(), pooled.tie_term);
  }
  return r;
}

EvalReport compare_arms(std::span<const ArmSamples> arms, double alpha,
                        std::size_t num_comparisons) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (num_comparisons == 0) throw InputError("num_comparisons must be >= 1");
  EvalReport report;
  report.corrected_alpha = alpha / static_cast<double>(num_comparisons);

  struct Metric {
    const char* name;
    std::vector<double> ArmSamples::*field;
  };
  const Metric metrics[] = {{"chars_typed", &ArmSamples::chars_typed},
                            {"selected_rank", &ArmSamples::selected_rank}};
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const ArmSamples& arm = arms[i];
    const ArmSamples* other = arms.size() > 1 ? &arms[(i + 1) % arms.size()] : nullptr;
    for (const Metric& m : metrics) {
      const std::vector<double>& values = arm.*m.field;
      ArmMetricRow row;
      row.arm = arm.name;
      row.metric = m.name;
      row.mean = mean_of(values);
      row.n = values.size();
      if (other && !values.empty() && !((*other).*m.field).empty()) {
        const MannWhitneyResult test = mann_whitney_u(values, (*other).*m.field);
        row.compared_to = other->name;
        row.u = test.u;
        row.p = test.p;
        row.significant = test.p < report.corrected_alpha;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

StabilityReport stability_study(std::span<const ClientUpdate> update_log, std::size_t sample_size,
                                std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (sample_size == 0) throw InputError("sample_size must be >= 1");
  if (trials == 0) throw InputError("trials must be >= 1");
  StabilityReport report;
  report.sample_size = sample_size;
  report.trials = trials;

  std::map<std::int64_t, std::vector<ClientUpdate>> by_iteration;
  for (const ClientUpdate& u : update_log) by_iteration[u.iteration].push_back(u);

  for (const auto& [iteration, updates] : by_iteration) {
    StabilityRow row;
    row.iteration = iteration;
    row.num_updates = updates.size();
    if (updates.size() > sample_size) {
      row.subsampled = true;
      const Weights full = weighted_average(updates);
      std::vector<double> distances(trials);
      parallel_for(trials, threads, [&](std::size_t trial) {
        Rng rng(seed, Stream::kStability,
                {static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(trial)});
        std::vector<std::size_t> idx(updates.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::vector<ClientUpdate> subset;
        subset.reserve(sample_size);
        for (std::size_t i = 0; i < sample_size; ++i) {
          std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
          subset.push_back(updates[idx[i]]);
        }
        distances[trial] = l1_distance(weighted_average(subset), full);
      });
      row.mean_l1 = mean_of(distances);
      double ss = 0.0;
      for (double d : distances) ss += (d - row.mean_l1) * (d - row.mean_l1);
      row.std_l1 = std::sqrt(ss / static_cast<double>(distances.size()));
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace fedrank
