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

#include "fedrank/evaluation.hpp"

#include "fedrank/parallel.hpp"
#include "fedrank/rng.hpp"

namespace fedrank {

std::vector<ArmSpec> standard_arms(const ModelParams& treatment, double decay_rate) {
  return {{"treatment", treatment, 0.0},
          {"control", ModelParams::defaults(), decay_rate},
          {"control-no-decay", ModelParams::defaults(), 0.0}};
}

std::vector<ArmSamples> run_evaluation(std::span<const ClientHistory> pool,
                                       std::span<const ArmSpec> arms, const ModelParams& truth,
                                       const ClientConfig& cfg, std::int64_t rounds,
                                       unsigned threads) {
  validate(cfg);
  // per_client[c][a] holds client c's samples under arm a.
  std::vector<std::vector<ArmSamples>> per_client(pool.size());
  parallel_for(pool.size(), threads, [&](std::size_t c) {
    const ClientHistory& client = pool[c];
    std::vector<double> truth_scores(client.pages.size());
    for (std::size_t i = 0; i < client.pages.size(); ++i) {
      truth_scores[i] = frecency(client.pages[i], truth);
    }
    per_client[c].resize(arms.size());
    std::vector<double> display(client.pages.size());
    for (std::size_t a = 0; a < arms.size(); ++a) {
      for (std::size_t i = 0; i < client.pages.size(); ++i) {
        display[i] = arms[a].decay_rate > 0.0
                         ? decayed_frecency(client.pages[i], arms[a].params, arms[a].decay_rate)
                         : frecency(client.pages[i], arms[a].params);
      }
      ArmSamples& out = per_client[c][a];
      for (std::int64_t r = 0; r < rounds; ++r) {
        Rng rng = evaluation_rng(client, r);
        for (const SearchEvent& e : simulate_search_round(client, display, truth_scores, cfg, rng)) {
          out.chars_typed.push_back(static_cast<double>(e.chars_typed));
          out.selected_rank.push_back(static_cast<double>(e.selected_index));
        }
      }
    }
  });

  std::vector<ArmSamples> merged(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    merged[a].name = arms[a].name;
    for (const auto& client : per_client) {
      const ArmSamples& s = client[a];
      merged[a].chars_typed.insert(merged[a].chars_typed.end(), s.chars_typed.begin(),
                                   s.chars_typed.end());
      merged[a].selected_rank.insert(merged[a].selected_rank.end(), s.selected_rank.begin(),
                                     s.selected_rank.end());
    }
  }
  return merged;
}

}  // namespace fedrank
