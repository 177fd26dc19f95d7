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

#include <functional>

#include "fedrank/frecency.hpp"

namespace fedrank {

enum class DifferenceMode { Central, Forward };

struct GradConfig {
  /// Relative perturbation; weight k moves by epsilon * max(1, |theta_k|).
  double epsilon = 1e-4;
  DifferenceMode mode = DifferenceMode::Central;
};

using LossFn = std::function<double(const ModelParams&)>;

/// Actual perturbation applied to a weight of the given value.
double perturbation_step(double weight, const GradConfig& cfg);

/// Finite-difference gradient of a black-box loss, one weight at a time with
/// all other weights held fixed. Central mode evaluates the loss 2 * kNumWeights
/// times, Forward mode kNumWeights + 1 times.
///
/// Throws NumericalError carrying the component index if a loss value is not
/// finite, and InputError if epsilon is not positive.
Weights approx_gradient(const LossFn& loss, const ModelParams& params, const GradConfig& cfg);

}  // namespace fedrank
