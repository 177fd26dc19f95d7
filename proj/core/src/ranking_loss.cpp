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

#include "fedrank/ranking_loss.hpp"

#include <algorithm>
#include <array>

#include "fedrank/errors.hpp"

namespace fedrank {

double svm_loss(std::span<const double> scores, std::size_t selected_index, double margin) {
  if (selected_index >= scores.size()) throw InputError("selected index out of range");
  if (!(margin >= 0.0)) throw InputError("margin must be nonnegative");
  const double selected = scores[selected_index];
  double loss = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == selected_index) continue;
    loss += std::max(0.0, scores[j] + margin - selected);
  }
  return loss;
}

double event_loss(const ModelParams& params, const SearchEvent& event, const LossConfig& cfg) {
  if (event.candidates.empty()) throw InputError("search event has no candidates");
  // Display lists are short; avoid a heap allocation per loss evaluation.
  std::array<double, 64> stack_scores{};
  std::vector<double> heap_scores;
  std::span<double> scores;
  if (event.candidates.size() <= stack_scores.size()) {
    scores = std::span(stack_scores.data(), event.candidates.size());
  } else {
    heap_scores.resize(event.candidates.size());
    scores = heap_scores;
  }
  for (std::size_t k = 0; k < event.candidates.size(); ++k) {
    scores[k] = frecency(event.candidates[k], params);
  }
  return svm_loss(scores, event.selected_index, cfg.margin);
}

}  // namespace fedrank
