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
#include <span>
#include <string>
#include <vector>

#include "fedrank/frecency.hpp"

namespace fedrank {

/// One search in the URL bar: the suggestion list as displayed and the
/// suggestion the user picked from it.
struct SearchEvent {
  std::vector<Page> candidates;
  std::size_t selected_index = 0;
  std::size_t chars_typed = 0;
  std::string query;

  friend bool operator==(const SearchEvent&, const SearchEvent&) = default;
};

struct LossConfig {
  /// Required score gap between the selected suggestion and every other one.
  double margin = 5.0;
};

/// Pointwise hinge ranking loss: sum over j != i of max(0, s_j + margin - s_i).
double svm_loss(std::span<const double> scores, std::size_t selected_index, double margin);

/// svm_loss over the frecency scores of the event's candidates.
double event_loss(const ModelParams& params, const SearchEvent& event, const LossConfig& cfg);

}  // namespace fedrank
