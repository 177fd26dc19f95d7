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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fedrank/analysis.hpp"
#include "fedrank/blackbox_grad.hpp"
#include "fedrank/cli.hpp"
#include "fedrank/evaluation.hpp"
#include "fedrank/fed_protocol.hpp"
#include "fedrank/parallel.hpp"
#include "fedrank/persistence.hpp"
#include "fedrank/ranking_loss.hpp"
#include "fedrank/rprop.hpp"
#include "fedrank/synth_clients.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fedrank {
namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
constexpr double kPerturbedTyped = 0.5;
constexpr double kPerturbedRecent = 40.0;

RunConfig training_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.num_clients_total = 5000;
  cfg.clients_per_iteration = 200;
  cfg.num_iterations = 100;
  cfg.seed = seed;
  cfg.truth = ModelParams::defaults();
  cfg.initial = ModelParams::defaults();
  cfg.initial.type[1] = kPerturbedTyped;
  cfg.initial.recency[0] = kPerturbedRecent;
  return cfg;
}

class Capture : public RunObserver {
 public:
  void on_start(const ServerState& s) override { states.push_back(s); }
  void on_iteration(const ServerState& s, const IterationRecord&,
                    std::span<const ClientUpdate> u) override {
    states.push_back(s);
    updates.insert(updates.end(), u.begin(), u.end());
  }
  void on_finish(const RunRecord&) override {}

  std::vector<ServerState> states;
  std::vector<ClientUpdate> updates;
};

struct SeedRun {
  std::uint64_t seed = 0;
  RunConfig cfg;
  std::vector<ClientHistory> pool;
  RunRecord record;
  Capture capture;
  std::vector<double> rolling;
};

struct Report {
  int failures = 0;

  void line(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %d: %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

SeedRun train(std::uint64_t seed, unsigned threads) {
  SeedRun run;
  run.seed = seed;
  run.cfg = training_config(seed);
  run.pool = gen_pool(run.cfg.num_clients_total, run.cfg.client, seed, threads);
  std::vector<ClientId> ids(run.pool.size());
  std::iota(ids.begin(), ids.end(), ClientId{0});
  const LocalTraining local{run.cfg.truth, run.cfg.client, run.cfg.loss, run.cfg.grad};
  run.record = run_training(run.cfg, ids, simulated_clients(run.pool, local), &run.capture, threads);
  std::vector<double> losses;
  for (const IterationRecord& it : run.record.iterations) losses.push_back(it.mean_loss);
  run.rolling = rolling_average(losses, 5);
  return run;
}

void loss_decline(Report& rep, const std::vector<SeedRun>& runs) {
  bool pass = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    const double first = r.rolling.front();
    const double last = r.rolling.back();
    const double ratio = last / first;
    pass &= r.record.iterations.size() == 100 && std::isfinite(ratio) && ratio <= 0.7;
    detail += "seed " + std::to_string(r.seed) + " rolling5 " + fmt("%.4g", first) + " -> " +
              fmt("%.4g", last) + " (ratio " + fmt("%.4f", ratio) + "); ";
  }
  rep.line(1, pass, "final rolling-5 loss <= 70% of initial on 3 seeds", detail);
}

void weight_recovery(Report& rep, const std::vector<SeedRun>& runs) {
  bool pass = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    const ModelParams& p = r.record.final_params;
    pass &= p.type[1] > kPerturbedTyped && p.recency[0] > kPerturbedRecent;
    double worst = 0.0;
    for (const IterationRecord& it : r.record.iterations) {
      for (double d : it.raw_delta) worst = std::max(worst, std::abs(d));
    }
    pass &= worst <= r.cfg.rprop.eta_max;
    detail += "seed " + std::to_string(r.seed) + " typed " + fmt("%.4g", p.type[1]) +
              " recent " + fmt("%.4g", p.recency[0]) + " max|step| " + fmt("%.4g", worst) + "; ";
  }
  rep.line(2, pass, "typed and 4-day weights move up from their perturbed start, steps <= eta_max",
           detail);
}

void gradient_fidelity(Report& rep, const SeedRun& source) {
  // Events come from simulated searches, parameters are random positive weights.
  std::mt19937_64 gen(2024);
  const LossConfig loss;
  const GradConfig grad;
  std::vector<SearchEvent> events;
  for (std::size_t c = 0; c < 400 && events.size() < 2000; ++c) {
    Rng rng = evaluation_rng(source.pool[c], 1000);
    for (SearchEvent& e : simulate_search_round(source.pool[c], source.cfg.initial, source.cfg.truth,
                                                source.cfg.client, rng)) {
      if (e.candidates.size() > 1) events.push_back(std::move(e));
    }
  }
  int accepted = 0;
  int rejected = 0;
  int mismatches = 0;
  double worst_rel = 0.0;
  while (accepted < 100 && rejected < 100000) {
    const ModelParams params = testing::random_params(gen);
    const SearchEvent& e = events[gen() % events.size()];
    bool near_kink = false;
    for (const oracle::HingeTerm& h : oracle::hinge_terms(e, params.weights(), loss.margin)) {
      double reach = 0.0;
      for (std::size_t k = 0; k < kNumWeights; ++k) {
        reach = std::max(reach, perturbation_step(params[k], grad) * std::abs(h.slope[k]));
      }
      near_kink |= std::abs(h.argument) < 10.0 * std::max(grad.epsilon, reach);
    }
    if (near_kink) {
      ++rejected;
      continue;
    }
    ++accepted;
    const Weights fd =
        approx_gradient([&](const ModelParams& q) { return event_loss(q, e, loss); }, params, grad);
    const Weights exact = oracle::event_loss_gradient(e, params.weights(), loss.margin);
    for (std::size_t k = 0; k < kNumWeights; ++k) {
      const double err = std::abs(fd[k] - exact[k]);
      if (err > std::max(1e-9, 1e-6 * std::abs(exact[k]))) ++mismatches;
      if (exact[k] != 0.0) worst_rel = std::max(worst_rel, err / std::abs(exact[k]));
    }
  }
  rep.line(3, accepted == 100 && mismatches == 0,
           "central differences match the analytic event-loss gradient away from kinks",
           std::to_string(accepted) + " pairs (" + std::to_string(rejected) +
               " near-kink draws skipped), " + std::to_string(mismatches) +
               " component mismatches, worst relative error " + fmt("%.3g", worst_rel));
}

void rprop_contract(Report& rep, const std::vector<SeedRun>& runs) {
  bool pass = true;
  std::size_t steps = 0;
  std::size_t replays = 0;
  for (const SeedRun& r : runs) {
    const RpropHyper& h = r.cfg.rprop;
    const auto& states = r.capture.states;
    for (std::size_t t = 0; t < r.record.iterations.size(); ++t) {
      const IterationRecord& it = r.record.iterations[t];
      for (std::size_t k = 0; k < kNumWeights; ++k) {
        pass &= it.step_sizes[k] >= h.eta_min && it.step_sizes[k] <= h.eta_max;
        const double moved = std::abs(it.raw_delta[k]);
        if (it.stepped && sign_of(it.aggregated_update[k]) != 0) {
          // Tolerance covers rounding in (theta - eta) - theta.
          const double tol = 1e-12 * std::max(1.0, std::abs(states[t].params[k]));
          pass &= moved >= h.eta_min - tol && moved <= h.eta_max + tol;
          ++steps;
        } else {
          pass &= moved == 0.0;
        }
      }
      // Replaying the round with a rescaled aggregate must give the same state bit for bit.
      if (!it.stepped) continue;
      for (double c : {0.001, 1.0, 1000.0}) {
        Weights scaled = it.aggregated_update;
        for (double& g : scaled) g *= c;
        const RpropResult res = rprop_step(states[t].rprop, scaled, states[t].params, r.cfg.constraints);
        pass &= res.params == states[t + 1].params && res.state == states[t + 1].rprop;
        ++replays;
      }
    }
  }
  // Random states and gradients, including zero components.
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    RpropState s = RpropState::initial({});
    for (std::size_t k = 0; k < kNumWeights; ++k) {
      s.prev_signs[k] = static_cast<std::int8_t>(static_cast<int>(gen() % 3) - 1);
      s.step_sizes[k] = 1e-3 + static_cast<double>(gen() % 2000) * 1e-3 * (2.0 - 1e-3) / 2000.0;
    }
    Weights g;
    for (double& x : g) x = gen() % 5 == 0 ? 0.0 : n(gen);
    const ModelParams p = testing::random_params(gen);
    const RpropResult base = rprop_step(s, g, p, ConstraintSpec{});
    for (double c : {0.001, 1000.0}) {
      Weights scaled = g;
      for (double& x : scaled) x *= c;
      const RpropResult res = rprop_step(s, scaled, p, ConstraintSpec{});
      pass &= res.params == base.params && res.unprojected == base.unprojected &&
              res.state == base.state;
    }
  }
  rep.line(4, pass, "pre-projection steps and step sizes stay in [eta_min, eta_max]; scale invariance",
           std::to_string(steps) + " nonzero-sign weight steps checked, " + std::to_string(replays) +
               " round replays at c in {0.001, 1, 1000}, 1000 random bit-exact cases");
}

void protocol_determinism(Report& rep) {
  namespace fs = std::filesystem;
  testing::TempDir dir("acceptance");
  // Same setup as the training runs above.
  const std::string text =
      "num_clients_total = 5000\n"
      "clients_per_iteration = 200\n"
      "num_iterations = 100\n"
      "seed = 1\n"
      "init.weights = 40, 70, 50, 30, 10, 1.2, 0.5, 1.4\n";
  write_file(dir / "run.cfg", text);

  std::ostringstream sink;
  const std::string cfg_path = (dir / "run.cfg").string();
  const int a = cli::run({"train", "-c", cfg_path, "-o", (dir / "a").string(), "--threads", "1"},
                         sink, sink);
  const int b = cli::run({"train", "-c", cfg_path, "-o", (dir / "b").string(), "--threads", "4"},
                         sink, sink);
  bool pass = a == 0 && b == 0;
  std::size_t compared = 0;
  std::size_t bytes = 0;
  if (pass) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir / "a"));
    }
    std::size_t in_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "b")) in_b += e.is_regular_file();
    pass &= files.size() == in_b;
    for (const fs::path& f : files) {
      const std::string x = read_file(dir / "a" / f);
      pass &= fs::exists(dir / "b" / f) && x == read_file(dir / "b" / f);
      bytes += x.size();
      ++compared;
    }
    pass &= fs::exists(dir / "a" / "snapshots" / "snapshot_000100.txt");
  }
  rep.line(5, pass, "cmd_train output is byte-identical with 1 and 4 worker threads",
           std::to_string(compared) + " files (" + std::to_string(bytes) +
               " bytes) compared: snapshots, update log, iteration log, loss curve");
}

void stability_trend(Report& rep, const std::vector<SeedRun>& runs, unsigned threads) {
  bool pass = true;
  std::string detail;
  for (const SeedRun& r : runs) {
    const StabilityReport st = stability_study(r.capture.updates, 50, 50, r.seed, threads);
    std::vector<double> series;
    for (const StabilityRow& row : st.rows) {
      if (row.subsampled) series.push_back(row.mean_l1);
    }
    const std::size_t q = series.size() / 4;
    if (q == 0) {
      pass = false;
      continue;
    }
    const double first = std::accumulate(series.begin(), series.begin() + q, 0.0) / q;
    const double last = std::accumulate(series.end() - q, series.end(), 0.0) / q;
    pass &= last < first;
    detail += "seed " + std::to_string(r.seed) + " first quartile " + fmt("%.4g", first) +
              " last quartile " + fmt("%.4g", last) + " (" + std::to_string(series.size()) +
              " iterations); ";
  }
  rep.line(6, pass, "subsampled-aggregate L1 distance lower in the last quartile than the first",
           detail);
}

void mann_whitney_correctness(Report& rep) {
  std::mt19937_64 gen(99);
  int cases = 0;
  int u_bad = 0;
  int p_bad = 0;
  double worst = 0.0;
  for (std::size_t na = 1; na <= 8; ++na) {
    for (std::size_t nb = 1; nb <= 8; ++nb) {
      for (int s = 0; s < 200; ++s) {
        const std::uint64_t range = 2 + gen() % 15;
        std::vector<double> a(na);
        std::vector<double> b(nb);
        for (double& x : a) x = static_cast<double>(gen() % range);
        for (double& x : b) x = static_cast<double>(gen() % range);
        const MannWhitneyResult r = mann_whitney_u(a, b);
        if (r.u != oracle::pair_count_u(a, b)) ++u_bad;
        const double diff = std::abs(r.p - oracle::permutation_p(a, b));
        worst = std::max(worst, diff);
        if (diff > 0.05) ++p_bad;
        ++cases;
      }
    }
  }
  rep.line(7, u_bad == 0 && p_bad == 0, "Mann-Whitney U and p against brute-force oracles",
           std::to_string(cases) + " cases over all 64 size pairs <= 8: " + std::to_string(u_bad) +
               " U mismatches, " + std::to_string(p_bad) + " p off by > 0.05, worst |dp| " +
               fmt("%.3g", worst));
}

void evaluation_direction(Report& rep, const std::vector<SeedRun>& runs, unsigned threads) {
  bool pass = true;
  std::string detail;
  const double alpha = 0.05 / 6.0;
  for (const SeedRun& r : runs) {
    const std::vector<ArmSpec> arms{{"trained", r.record.final_params, 0.0},
                                    {"initial", r.cfg.initial, 0.0}};
    const std::vector<ArmSamples> s = run_evaluation(r.pool, arms, r.cfg.truth, r.cfg.client, 5, threads);
    const double trained = mean(s[0].chars_typed);
    const double initial = mean(s[1].chars_typed);
    const MannWhitneyResult mw = mann_whitney_u(s[0].chars_typed, s[1].chars_typed);
    const std::size_t n = std::min(s[0].chars_typed.size(), s[1].chars_typed.size());
    pass &= n >= 20000 && trained < initial && mw.p < alpha;
    char buf[200];
    std::snprintf(buf, sizeof buf, "seed %llu chars %.4f vs %.4f, n %zu, p %.3g; ",
                  static_cast<unsigned long long>(r.seed), trained, initial, n, mw.p);
    detail += buf;
  }
  rep.line(8, pass, "trained model needs fewer typed characters than the perturbed start (p < 0.05/6)",
           detail);
}

void aggregation_equivalence(Report& rep) {
  ClientUpdate a;
  a.client_id = 0;
  a.n_examples = 1;
  a.gradient.fill(4.0);
  ClientUpdate b;
  b.client_id = 1;
  b.n_examples = 3;
  b.gradient.fill(0.0);
  const Weights hand = weighted_average(std::vector<ClientUpdate>{a, b});
  bool pass = std::all_of(hand.begin(), hand.end(), [](double x) { return x == 1.0; });

  std::mt19937_64 gen(31);
  std::lognormal_distribution<double> mag(0.0, 2.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SignVector common;
    for (auto& s : common) s = static_cast<std::int8_t>(static_cast<int>(gen() % 3) - 1);
    const std::size_t clients = 1 + gen() % 25;
    std::vector<ClientUpdate> ups;
    std::vector<SignVector> votes;
    for (std::size_t c = 0; c < clients; ++c) {
      ClientUpdate u;
      u.client_id = c;
      u.n_examples = 1 + static_cast<std::uint32_t>(gen() % 50);
      for (std::size_t k = 0; k < kNumWeights; ++k) u.gradient[k] = common[k] * mag(gen);
      votes.push_back(signs_of(u.gradient));
      ups.push_back(u);
    }
    if (sign_vote(votes) != signs_of(weighted_average(ups))) ++mismatches;
  }
  pass &= mismatches == 0;
  rep.line(9, pass, "weighted average hand case and sign vote vs sign of average under agreement",
           "n=(1,3), H=(4,0) -> " + fmt("%.17g", hand[0]) + "; " + std::to_string(mismatches) +
               " mismatches in 1000 agreement-constrained cases");
}

}  // namespace
}  // namespace fedrank

int main() {
  using namespace fedrank;
  const unsigned threads = default_threads();
  Report rep;

  std::vector<SeedRun> runs;
  for (std::uint64_t seed : kSeeds) runs.push_back(train(seed, threads));

  loss_decline(rep, runs);
  weight_recovery(rep, runs);
  gradient_fidelity(rep, runs.front());
  rprop_contract(rep, runs);
  protocol_determinism(rep);
  stability_trend(rep, runs, threads);
  mann_whitney_correctness(rep);
  evaluation_direction(rep, runs, threads);
  aggregation_equivalence(rep);

  std::printf("%d of 9 criteria passed\n", 9 - rep.failures);
  return rep.failures == 0 ? 0 : 1;
}
