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

// Server-side resilient propagation (Rprop).
//
// Only the sign of each aggregated gradient component is used. Each weight has
// its own step size, which grows by `alpha` while the sign repeats and shrinks
// by `beta` when it flips, clipped to [eta_min, eta_max]. The step size is
// updated first and the weight then moves by the updated step. There is no
// weight backtracking.
//
// After every step the weights are projected onto the feasible set: all
// weights nonnegative, and each recency bucket no larger than the next newer
// one.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fedrank/frecency.hpp"

namespace fedrank {

using SignVector = std::array<std::int8_t, kNumWeights>;

struct RpropHyper {
  double eta0 = 0.5;
  double alpha = 1.2;
  double beta = 0.5;
  double eta_min = 1e-3;
  double eta_max = 2.0;

  friend bool operator==(const RpropHyper&, const RpropHyper&) = default;
};

/// Throws InputError unless alpha > 1 > beta > 0 and 0 < eta_min <= eta0 <= eta_max.
void validate(const RpropHyper& hyper);

struct RpropState {
  Weights step_sizes{};
  SignVector prev_signs{};
  RpropHyper hyper;

  /// All step sizes at eta0, previous signs zero.
  static RpropState initial(const RpropHyper& hyper);

  friend bool operator==(const RpropState&, const RpropState&) = default;
};

struct ConstraintSpec {
  bool nonneg = true;
  bool monotone_recency = true;
  /// Cap on the magnitude of any single-weight change in one step.
  double max_step = 2.0;
};

struct RpropResult {
  ModelParams params;
  /// Weights after the sign step but before projection.
  ModelParams unprojected;
  RpropState state;
};

std::int8_t sign_of(double x);
SignVector signs_of(const Weights& grad);

/// One Rprop iteration. `grad` may be a full gradient or a sign vector; only
/// signs are consumed. Throws NumericalError (state untouched) when any
/// component is not finite.
RpropResult rprop_step(const RpropState& state, const Weights& grad, const ModelParams& params,
                       const ConstraintSpec& constraints);

/// Componentwise plurality of client sign vectors; exact ties give 0.
/// Throws InputError on an empty list.
SignVector sign_vote(std::span<const SignVector> votes);

/// Clamp to nonnegative, then sweep recency buckets newest to oldest so that no
/// bucket exceeds its newer neighbour.
ModelParams project(const ModelParams& params, const ConstraintSpec& spec);

}  // namespace fedrank
