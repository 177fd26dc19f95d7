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

#include "fedrank/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "fedrank/errors.hpp"
#include "fedrank/persistence.hpp"

namespace fedrank {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T to_integer(std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_real(std::string_view v) {
  try {
    return parse_double(v);
  } catch (const IoError&) {
    throw ConfigError("expected a number, got '" + std::string(v) + "'");
  }
}

bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_reals(std::string_view v, std::size_t expected) {
  std::vector<double> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(to_real(trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  if (out.size() != expected) {
    throw ConfigError("expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

Field real_field(std::string key, std::function<double&(ExperimentConfig&)> ref) {
  return {std::move(key), [ref](ExperimentConfig& c, std::string_view v) { ref(c) = to_real(v); },
          [ref](const ExperimentConfig& c) {
            return format_double(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

Field bool_field(std::string key, std::function<bool&(ExperimentConfig&)> ref) {
  return {std::move(key), [ref](ExperimentConfig& c, std::string_view v) { ref(c) = to_bool(v); },
          [ref](const ExperimentConfig& c) {
            return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          }};
}

template <typename T>
Field integer(std::string key, std::function<T&(ExperimentConfig&)> ref) {
  return {std::move(key), [ref](ExperimentConfig& c, std::string_view v) { ref(c) = to_integer<T>(v); },
          [ref](const ExperimentConfig& c) {
            return std::to_string(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

Field params_field(std::string key, std::function<ModelParams&(ExperimentConfig&)> ref) {
  return {std::move(key),
          [ref](ExperimentConfig& c, std::string_view v) {
            const std::vector<double> w = to_reals(v, kNumWeights);
            Weights arr{};
            std::copy(w.begin(), w.end(), arr.begin());
            ref(c) = ModelParams::from_weights(arr);
          },
          [ref](const ExperimentConfig& c) {
            const Weights w = ref(const_cast<ExperimentConfig&>(c)).weights();
            return join(w);
          }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      integer<std::size_t>("num_clients_total", [](C& c) -> auto& { return c.run.num_clients_total; }),
      integer<std::size_t>("clients_per_iteration",
                           [](C& c) -> auto& { return c.run.clients_per_iteration; }),
      integer<std::int64_t>("num_iterations", [](C& c) -> auto& { return c.run.num_iterations; }),
      integer<std::uint64_t>("seed", [](C& c) -> auto& { return c.run.seed; }),
      {"aggregation_mode",
       [](C& c, std::string_view v) {
         if (v == "weighted_average") {
           c.run.aggregation = AggregationMode::WeightedAverage;
         } else if (v == "sign_vote") {
           c.run.aggregation = AggregationMode::SignVote;
         } else {
           throw ConfigError("aggregation_mode must be weighted_average or sign_vote");
         }
       },
       [](const C& c) {
         return std::string(c.run.aggregation == AggregationMode::SignVote ? "sign_vote"
                                                                            : "weighted_average");
       }},
      real_field("loss.margin", [](C& c) -> auto& { return c.run.loss.margin; }),
      real_field("grad.epsilon", [](C& c) -> auto& { return c.run.grad.epsilon; }),
      {"grad.mode",
       [](C& c, std::string_view v) {
         if (v == "central") {
           c.run.grad.mode = DifferenceMode::Central;
         } else if (v == "forward") {
           c.run.grad.mode = DifferenceMode::Forward;
         } else {
           throw ConfigError("grad.mode must be central or forward");
         }
       },
       [](const C& c) {
         return std::string(c.run.grad.mode == DifferenceMode::Forward ? "forward" : "central");
       }},
      real_field("rprop.eta0", [](C& c) -> auto& { return c.run.rprop.eta0; }),
      real_field("rprop.alpha", [](C& c) -> auto& { return c.run.rprop.alpha; }),
      real_field("rprop.beta", [](C& c) -> auto& { return c.run.rprop.beta; }),
      real_field("rprop.eta_min", [](C& c) -> auto& { return c.run.rprop.eta_min; }),
      real_field("rprop.eta_max", [](C& c) -> auto& { return c.run.rprop.eta_max; }),
      bool_field("constraints.nonneg", [](C& c) -> auto& { return c.run.constraints.nonneg; }),
      bool_field("constraints.monotone_recency",
                 [](C& c) -> auto& { return c.run.constraints.monotone_recency; }),
      real_field("constraints.max_step", [](C& c) -> auto& { return c.run.constraints.max_step; }),
      integer<std::int64_t>("convergence.max_iterations",
                            [](C& c) -> auto& { return c.run.convergence.max_iterations; }),
      real_field("convergence.min_step_norm",
                 [](C& c) -> auto& { return c.run.convergence.min_step_norm; }),
      integer<std::int64_t>("convergence.patience",
                            [](C& c) -> auto& { return c.run.convergence.patience; }),
      bool_field("adaptive.enabled", [](C& c) -> auto& { return c.run.adaptive.enabled; }),
      real_field("adaptive.variance_threshold",
                 [](C& c) -> auto& { return c.run.adaptive.variance_threshold; }),
      integer<std::size_t>("adaptive.min_updates",
                           [](C& c) -> auto& { return c.run.adaptive.min_updates; }),
      params_field("init.weights", [](C& c) -> auto& { return c.run.initial; }),
      params_field("truth.weights", [](C& c) -> auto& { return c.run.truth; }),
      integer<std::int64_t>("client.pages_min",
                            [](C& c) -> auto& { return c.run.client.pages_per_client.min; }),
      integer<std::int64_t>("client.pages_max",
                            [](C& c) -> auto& { return c.run.client.pages_per_client.max; }),
      real_field("client.visit_frequency_mean",
                 [](C& c) -> auto& { return c.run.client.visit_frequency_mean; }),
      real_field("client.bookmark_fraction",
                 [](C& c) -> auto& { return c.run.client.bookmark_fraction; }),
      real_field("client.click_noise_variance",
                 [](C& c) -> auto& { return c.run.client.click_noise_variance; }),
      real_field("client.recency_mean_days",
                 [](C& c) -> auto& { return c.run.client.recency_mean_days; }),
      real_field("client.recency_max_days",
                 [](C& c) -> auto& { return c.run.client.recency_max_days; }),
      real_field("client.type_freq.followed_link",
                 [](C& c) -> auto& { return c.run.client.visit_types.followed_link; }),
      real_field("client.type_freq.typed",
                 [](C& c) -> auto& { return c.run.client.visit_types.typed; }),
      real_field("client.type_freq.bookmarked",
                 [](C& c) -> auto& { return c.run.client.visit_types.bookmarked; }),
      real_field("client.type_freq.other",
                 [](C& c) -> auto& { return c.run.client.visit_types.other; }),
      integer<std::int64_t>("client.searches_min",
                            [](C& c) -> auto& { return c.run.client.searches_per_round.min; }),
      integer<std::int64_t>("client.searches_max",
                            [](C& c) -> auto& { return c.run.client.searches_per_round.max; }),
      integer<std::size_t>("client.display_limit",
                           [](C& c) -> auto& { return c.run.client.display_limit; }),
      {"client.target_choice",
       [](C& c, std::string_view v) {
         if (v == "truth_weighted") {
           c.run.client.target_choice = TargetChoice::TruthWeighted;
         } else if (v == "visit_weighted") {
           c.run.client.target_choice = TargetChoice::VisitWeighted;
         } else if (v == "uniform") {
           c.run.client.target_choice = TargetChoice::Uniform;
         } else {
           throw ConfigError(
               "client.target_choice must be truth_weighted, visit_weighted or uniform");
         }
       },
       [](const C& c) {
         switch (c.run.client.target_choice) {
           case TargetChoice::TruthWeighted: return std::string("truth_weighted");
           case TargetChoice::VisitWeighted: return std::string("visit_weighted");
           case TargetChoice::Uniform: return std::string("uniform");
         }
         return std::string("truth_weighted");
       }},
      integer<std::int64_t>("eval.rounds", [](C& c) -> auto& { return c.eval.rounds; }),
      real_field("eval.decay_rate", [](C& c) -> auto& { return c.eval.decay_rate; }),
      real_field("eval.alpha", [](C& c) -> auto& { return c.eval.alpha; }),
      integer<std::size_t>("eval.num_comparisons",
                           [](C& c) -> auto& { return c.eval.num_comparisons; }),
      integer<std::size_t>("stability.sample_size",
                           [](C& c) -> auto& { return c.stability.sample_size; }),
      integer<std::size_t>("stability.trials", [](C& c) -> auto& { return c.stability.trials; }),
  };
  return table;
}

void validate_experiment(const ExperimentConfig& cfg) {
  validate(cfg.run);
  if (cfg.eval.rounds < 1) throw ConfigError("eval.rounds must be >= 1");
  if (!(cfg.eval.decay_rate >= 0.0 && cfg.eval.decay_rate < 1.0)) {
    throw ConfigError("eval.decay_rate must lie in [0, 1)");
  }
  if (!(cfg.eval.alpha > 0.0 && cfg.eval.alpha < 1.0)) throw ConfigError("eval.alpha must lie in (0, 1)");
  if (cfg.eval.num_comparisons < 1) throw ConfigError("eval.num_comparisons must be >= 1");
  if (cfg.stability.sample_size < 1) throw ConfigError("stability.sample_size must be >= 1");
  if (cfg.stability.trials < 1) throw ConfigError("stability.trials must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + std::string(key) + ": " + e.what());
    }
  }
  // max_step follows eta_max unless given explicitly.
  if (!seen.contains("constraints.max_step")) cfg.run.constraints.max_step = cfg.run.rprop.eta_max;
  validate_experiment(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace fedrank
