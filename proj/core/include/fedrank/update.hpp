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

#include <cstdint>
#include <vector>

#include "fedrank/frecency.hpp"

namespace fedrank {

using ClientId = std::uint64_t;

struct UpdateMetrics {
  double mean_loss = 0.0;
  std::vector<std::uint32_t> chars_typed;
  std::vector<std::uint32_t> selected_ranks;

  friend bool operator==(const UpdateMetrics&, const UpdateMetrics&) = default;
};

/// What a client reports to the server after one round. This is the only
/// client-derived data the server ever sees.
struct ClientUpdate {
  ClientId client_id = 0;
  std::int64_t iteration = 0;
  /// Mean gradient over the round's events, or its sign vector in sign-vote mode.
  Weights gradient{};
  std::uint32_t n_examples = 1;
  UpdateMetrics metrics;

  friend bool operator==(const ClientUpdate&, const ClientUpdate&) = default;
};

}  // namespace fedrank
