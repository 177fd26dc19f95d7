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
#include <span>
#include <string>
#include <vector>

#include "fedrank/analysis.hpp"
#include "fedrank/frecency.hpp"
#include "fedrank/synth_clients.hpp"

namespace fedrank {

/// A ranking served to users during evaluation.
struct ArmSpec {
  std::string name;
  ModelParams params;
  /// Daily decay applied to cached scores; 0 disables decay.
  double decay_rate = 0.0;
};

/// The treatment / control / control-no-decay arms.
std::vector<ArmSpec> standard_arms(const ModelParams& treatment, double decay_rate);

/// Simulates `rounds` evaluation rounds for every client under every arm and
/// collects per-event metrics. Evaluation events come from streams disjoint
/// from training; every arm replays the same per-client, per-round stream.
std::vector<ArmSamples> run_evaluation(std::span<const ClientHistory> pool,
                                       std::span<const ArmSpec> arms, const ModelParams& truth,
                                       const ClientConfig& cfg, std::int64_t rounds,
                                       unsigned threads = 1);

}  // namespace fedrank
