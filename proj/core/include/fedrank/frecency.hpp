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

// Parameterized frecency scoring.
//
// A page's score is the mean visit score over its most recent visits, scaled
// by its total visit count. A visit scores recency(bucket of age) times the
// weight of the way it was visited. The eight bucket and type weights form the
// trainable parameter vector; bucket boundaries and the recent-visit cap are
// structural and never trained.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedrank {

enum class VisitType : std::uint8_t { FollowedLink, Typed, Bookmarked, Other };

inline constexpr std::size_t kNumRecencyBuckets = 5;
inline constexpr std::size_t kNumTypeWeights = 3;
inline constexpr std::size_t kNumWeights = kNumRecencyBuckets + kNumTypeWeights;

/// Upper edges (inclusive, in days) of the first four recency buckets.
inline constexpr std::array<double, kNumRecencyBuckets - 1> kBucketUpperDays = {4.0, 14.0, 31.0,
                                                                               90.0};
/// Only this many of the most recent visits contribute to a score.
inline constexpr std::size_t kRecentVisitCap = 10;

using Weights = std::array<double, kNumWeights>;

std::string_view to_string(VisitType type);
VisitType visit_type_from_string(std::string_view name);

struct Visit {
  double age_days = 0.0;
  VisitType type = VisitType::Other;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Page {
  std::uint32_t id = 0;
  std::string url;
  /// Newest first, i.e. ascending age.
  std::vector<Visit> visits;
  std::uint32_t total_visit_count = 0;
  bool bookmarked = false;

  friend bool operator==(const Page&, const Page&) = default;
};

/// Throws InputError when a page breaks its invariants (negative ages, unsorted
/// visits, total count below the number of recorded visits).
void validate(const Page& page);

/// The trainable weights. Flat index order is recency buckets 0..4 followed by
/// the FollowedLink, Typed and Bookmarked type weights.
struct ModelParams {
  std::array<double, kNumRecencyBuckets> recency{};
  std::array<double, kNumTypeWeights> type{};

  /// The weights of the hand-tuned production ranking.
  static ModelParams defaults() {
    return ModelParams{{100.0, 70.0, 50.0, 30.0, 10.0}, {1.2, 2.0, 1.4}};
  }

  static ModelParams from_weights(const Weights& w);
  Weights weights() const;

  double& operator[](std::size_t i) {
    return i < kNumRecencyBuckets ? recency[i] : type[i - kNumRecencyBuckets];
  }
  double operator[](std::size_t i) const {
    return i < kNumRecencyBuckets ? recency[i] : type[i - kNumRecencyBuckets];
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Human-readable weight names in flat index order.
extern const std::array<std::string_view, kNumWeights> kWeightNames;

/// Bucket index for an age; boundary days belong to the more recent bucket.
std::size_t recency_bucket(double age_days);

double recency_weight(double age_days, const ModelParams& params);

/// Weight of a visit type; Other is fixed at zero.
double type_weight(VisitType type, const ModelParams& params);

double visit_score(const Visit& visit, const ModelParams& params);

/// total_visit_count / |T| * sum of visit scores over T, where T is the up-to-10
/// most recent visits. Pages without recorded visits score 0.
double frecency(const Page& page, const ModelParams& params);

/// Multiplies every cached score by (1 - rate). Requires 0 <= rate < 1.
std::vector<double> apply_decay(std::span<const double> scores, double rate);

/// Score of a page as a cache would hold it when it was last recomputed at its
/// newest visit and has been decayed once per whole day since.
double decayed_frecency(const Page& page, const ModelParams& params, double rate);

}  // namespace fedrank
