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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fedrank/frecency.hpp"
#include "fedrank/ranking_loss.hpp"

namespace fedrank::testing {

inline Page make_page(std::uint32_t id, std::initializer_list<std::pair<double, VisitType>> visits,
                      std::uint32_t total = 0) {
  Page p;
  p.id = id;
  p.url = "https://page" + std::to_string(id) + ".test/";
  for (const auto& [age, type] : visits) p.visits.push_back({age, type});
  p.total_visit_count = total == 0 ? static_cast<std::uint32_t>(p.visits.size()) : total;
  return p;
}

inline Page random_page(std::uint32_t id, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> count(1, 14);
  std::uniform_real_distribution<double> age(0.0, 200.0);
  std::uniform_int_distribution<int> type(0, 3);
  Page p;
  p.id = id;
  p.url = "https://page" + std::to_string(id) + ".test/";
  const int n = count(gen);
  std::vector<double> ages(static_cast<std::size_t>(n));
  for (double& a : ages) a = age(gen);
  std::sort(ages.begin(), ages.end());
  const std::size_t kept = std::min<std::size_t>(ages.size(), kRecentVisitCap);
  for (std::size_t v = 0; v < kept; ++v) {
    p.visits.push_back({ages[v], static_cast<VisitType>(type(gen))});
  }
  p.total_visit_count = static_cast<std::uint32_t>(n) + static_cast<std::uint32_t>(gen() % 5);
  return p;
}

inline ModelParams random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> rec(1.0, 120.0);
  std::uniform_real_distribution<double> typ(0.1, 3.0);
  ModelParams p;
  for (double& r : p.recency) r = rec(gen);
  for (double& t : p.type) t = typ(gen);
  return p;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fedrank_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fedrank::testing
