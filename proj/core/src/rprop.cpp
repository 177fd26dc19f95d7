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

#include "fedrank/rprop.hpp"

#include <algorithm>
#include <cmath>

#include "fedrank/errors.hpp"

namespace fedrank {

void validate(const RpropHyper& h) {
  if (!(h.alpha > 1.0)) throw InputError("rprop alpha must be > 1");
  if (!(h.beta > 0.0 && h.beta < 1.0)) throw InputError("rprop beta must lie in (0, 1)");
  if (!(h.eta_min > 0.0)) throw InputError("rprop eta_min must be > 0");
  if (!(h.eta_min <= h.eta_max)) throw InputError("rprop eta_min must be <= eta_max");
  if (!(h.eta0 >= h.eta_min && h.eta0 <= h.eta_max)) {
    throw InputError("rprop eta0 must lie in [eta_min, eta_max]");
  }
}

RpropState RpropState::initial(const RpropHyper& hyper) {
  validate(hyper);
  RpropState s;
  s.hyper = hyper;
  s.step_sizes.fill(hyper.eta0);
  s.prev_signs.fill(0);
  return s;
}

std::int8_t sign_of(double x) { return static_cast<std::int8_t>((x > 0.0) - (x < 0.0)); }

SignVector signs_of(const Weights& grad) {
  SignVector s{};
  for (std::size_t i = 0; i < kNumWeights; ++i) s[i] = sign_of(grad[i]);
  return s;
}

RpropResult rprop_step(const RpropState& state, const Weights& grad, const ModelParams& params,
                       const ConstraintSpec& constraints) {
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    if (!std::isfinite(grad[i])) throw NumericalError("aggregated gradient is not finite", i);
  }
  const RpropHyper& h = state.hyper;
  RpropResult out{params, params, state};
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    const std::int8_t sign = sign_of(grad[i]);
    const int agreement = sign * state.prev_signs[i];
    double eta = state.step_sizes[i];
    if (agreement > 0) {
      eta = std::min(eta * h.alpha, h.eta_max);
    } else if (agreement < 0) {
      eta = std::max(eta * h.beta, h.eta_min);
    }
    out.state.step_sizes[i] = eta;
    out.state.prev_signs[i] = sign;
    out.unprojected[i] = params[i] - std::min(eta, constraints.max_step) * sign;
  }
  out.params = project(out.unprojected, constraints);
  return out;
}

SignVector sign_vote(std::span<const SignVector> votes) {
  if (votes.empty()) throw InputError("sign_vote needs at least one vote");
  SignVector out{};
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    std::array<std::size_t, 3> counts{};  // -1, 0, +1
    for (const SignVector& v : votes) ++counts[static_cast<std::size_t>(v[i] + 1)];
    const std::size_t best = *std::max_element(counts.begin(), counts.end());
    const auto winners = std::count(counts.begin(), counts.end(), best);
    if (winners > 1) {
      out[i] = 0;
    } else {
      out[i] = static_cast<std::int8_t>(
          std::distance(counts.begin(), std::find(counts.begin(), counts.end(), best)) - 1);
    }
  }
  return out;
}

ModelParams project(const ModelParams& params, const ConstraintSpec& spec) {
  ModelParams out = params;
  if (spec.nonneg) {
    for (std::size_t i = 0; i < kNumWeights; ++i) out[i] = std::max(0.0, out[i]);
  }
  if (spec.monotone_recency) {
    for (std::size_t b = 1; b < kNumRecencyBuckets; ++b) {
      out.recency[b] = std::min(out.recency[b], out.recency[b - 1]);
    }
  }
  return out;
}

}  // namespace fedrank
