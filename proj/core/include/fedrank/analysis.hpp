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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedrank/update.hpp"

namespace fedrank {

/// Sum of absolute componentwise differences. Throws InputError on a length
/// mismatch.
double l1_distance(std::span<const double> u, std::span<const double> v);

/// Element t is the mean of the last min(t + 1, window) values. NaN entries
/// are skipped; a window holding only NaNs yields NaN.
std::vector<double> rolling_average(std::span<const double> series, std::size_t window = 5);

enum class PValueMethod {
  /// Exact permutation when both samples have at most kExactMaxSampleSize
  /// values, normal approximation otherwise.
  Auto,
  Exact,
  Normal,
};

inline constexpr std::size_t kExactMaxSampleSize = 8;
/// Largest pooled size PValueMethod::Exact accepts.
inline constexpr std::size_t kExactMaxPooledSize = 24;

struct MannWhitneyResult {
  /// Pairs (x in a, y in b) with x > y, ties counting one half.
  double u = 0.0;
  /// Two-sided.
  double p = 1.0;
};

/// Mann-Whitney U test with midranks for ties. The normal approximation uses
/// the tie-corrected variance and a continuity correction. Throws InputError
/// when either sample is empty.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 PValueMethod method = PValueMethod::Auto);

/// Per-event evaluation samples of one experiment arm.
struct ArmSamples {
  std::string name;
  std::vector<double> chars_typed;
  std::vector<double> selected_rank;
};

struct ArmMetricRow {
  std::string arm;
  std::string metric;
  double mean = 0.0;
  std::size_t n = 0;
  /// Arm this row is tested against.
  std::string compared_to;
  double u = 0.0;
  double p = 1.0;
  bool significant = false;
};

struct EvalReport {
  double corrected_alpha = 0.0;
  std::vector<ArmMetricRow> rows;
};

/// Tests every arm against the next one (cyclically) on both metrics, so three
/// arms give all three pairs. Significance is judged at alpha / num_comparisons.
EvalReport compare_arms(std::span<const ArmSamples> arms, double alpha = 0.05,
                        std::size_t num_comparisons = 6);

struct StabilityRow {
  std::int64_t iteration = 0;
  std::size_t num_updates = 0;
  /// False when the iteration had no more than sample_size updates, in which
  /// case the subsample is the full set and both statistics are 0.
  bool subsampled = false;
  double mean_l1 = 0.0;
  double std_l1 = 0.0;
};

struct StabilityReport {
  std::size_t sample_size = 0;
  std::size_t trials = 0;
  std::vector<StabilityRow> rows;
};

/// For every iteration in the log, compares the weighted-average update of all
/// reports with that of `trials` random subsets of `sample_size` reports drawn
/// without replacement. Deterministic in seed.
StabilityReport stability_study(std::span<const ClientUpdate> update_log,
                                std::size_t sample_size = 2000, std::size_t trials = 50,
                                std::uint64_t seed = 0, unsigned threads = 1);

}  // namespace fedrank
