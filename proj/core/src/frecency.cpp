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

#include "fedrank/frecency.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedrank/errors.hpp"

namespace fedrank {

const std::array<std::string_view, kNumWeights> kWeightNames = {
    "recency_4d", "recency_14d",   "recency_31d", "recency_90d",
    "recency_old", "type_followed_link", "type_typed", "type_bookmarked"};

std::string_view to_string(VisitType type) {
  switch (type) {
    case VisitType::FollowedLink: return "followed_link";
    case VisitType::Typed: return "typed";
    case VisitType::Bookmarked: return "bookmarked";
    case VisitType::Other: return "other";
  }
  return "other";
}

VisitType visit_type_from_string(std::string_view name) {
  if (name == "followed_link") return VisitType::FollowedLink;
  if (name == "typed") return VisitType::Typed;
  if (name == "bookmarked") return VisitType::Bookmarked;
  if (name == "other") return VisitType::Other;
  throw InputError("unknown visit type '" + std::string(name) + "'");
}

void validate(const Page& page) {
  if (page.total_visit_count < page.visits.size()) {
    throw InputError("page " + std::to_string(page.id) + ": total_visit_count below recorded visits");
  }
  for (std::size_t i = 0; i < page.visits.size(); ++i) {
    const double age = page.visits[i].age_days;
    if (!(age >= 0.0) || !std::isfinite(age)) {
      throw InputError("page " + std::to_string(page.id) + ": visit age must be finite and >= 0");
    }
    if (i > 0 && age < page.visits[i - 1].age_days) {
      throw InputError("page " + std::to_string(page.id) + ": visits must be newest first");
    }
  }
}

ModelParams ModelParams::from_weights(const Weights& w) {
  ModelParams p;
  for (std::size_t i = 0; i < kNumWeights; ++i) p[i] = w[i];
  return p;
}

Weights ModelParams::weights() const {
  Weights w{};
  for (std::size_t i = 0; i < kNumWeights; ++i) w[i] = (*this)[i];
  return w;
}

std::size_t recency_bucket(double age_days) {
  if (!(age_days >= 0.0)) throw InputError("visit age must be >= 0");
  for (std::size_t b = 0; b < kBucketUpperDays.size(); ++b) {
    if (age_days <= kBucketUpperDays[b]) return b;
  }
  return kNumRecencyBuckets - 1;
}

double recency_weight(double age_days, const ModelParams& params) {
  return params.recency[recency_bucket(age_days)];
}

double type_weight(VisitType type, const ModelParams& params) {
  switch (type) {
    case VisitType::FollowedLink: return params.type[0];
    case VisitType::Typed: return params.type[1];
    case VisitType::Bookmarked: return params.type[2];
    case VisitType::Other: return 0.0;
  }
  return 0.0;
}

double visit_score(const Visit& visit, const ModelParams& params) {
  return recency_weight(visit.age_days, params) * type_weight(visit.type, params);
}

double frecency(const Page& page, const ModelParams& params) {
  const std::size_t recent = std::min(page.visits.size(), kRecentVisitCap);
  if (recent == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < recent; ++i) sum += visit_score(page.visits[i], params);
  return static_cast<double>(page.total_visit_count) / static_cast<double>(recent) * sum;
}

std::vector<double> apply_decay(std::span<const double> scores, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("decay rate must lie in [0, 1)");
  std::vector<double> out(scores.begin(), scores.end());
  for (double& s : out) s *= 1.0 - rate;
  return out;
}

double decayed_frecency(const Page& page, const ModelParams& params, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InputError("decay rate must lie in [0, 1)");
  const double score = frecency(page, params);
  if (page.visits.empty()) return score;
  const double days = std::floor(page.visits.front().age_days);
  return score * std::pow(1.0 - rate, days);
}

}  // namespace fedrank
