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

#include "fedrank/blackbox_grad.hpp"

#include <algorithm>
#include <cmath>

#include "fedrank/errors.hpp"

namespace fedrank {
namespace {

double checked(double value, std::size_t component) {
  if (!std::isfinite(value)) throw NumericalError("loss is not finite", component);
  return value;
}

}  // namespace

double perturbation_step(double weight, const GradConfig& cfg) {
  return cfg.epsilon * std::max(1.0, std::abs(weight));
}

Weights approx_gradient(const LossFn& loss, const ModelParams& params, const GradConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InputError("gradient epsilon must be positive");
  Weights grad{};
  ModelParams probe = params;

  if (cfg.mode == DifferenceMode::Forward) {
    const double base = checked(loss(params), 0);
    for (std::size_t k = 0; k < kNumWeights; ++k) {
      const double h = perturbation_step(params[k], cfg);
      probe[k] = params[k] + h;
      const double up = checked(loss(probe), k);
      probe[k] = params[k];
      // Divide by the step actually representable in floating point.
      grad[k] = (up - base) / ((params[k] + h) - params[k]);
    }
    return grad;
  }

  for (std::size_t k = 0; k < kNumWeights; ++k) {
    const double h = perturbation_step(params[k], cfg);
    const double hi = params[k] + h;
    const double lo = params[k] - h;
    probe[k] = hi;
    const double up = checked(loss(probe), k);
    probe[k] = lo;
    const double down = checked(loss(probe), k);
    probe[k] = params[k];
    grad[k] = (up - down) / (hi - lo);
  }
  return grad;
}

}  // namespace fedrank
