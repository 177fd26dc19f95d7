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

#include "fedrank/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <exception>
#include <iomanip>
#include <numeric>
#include <string>
#include <utility>

#include "fedrank/config.hpp"
#include "fedrank/errors.hpp"
#include "fedrank/evaluation.hpp"
#include "fedrank/fed_protocol.hpp"
#include "fedrank/persistence.hpp"
#include "fedrank/synth_clients.hpp"

namespace fedrank::cli {
namespace {

ExperimentConfig load(const std::filesystem::path& path, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.run.seed = *seed;
  try {
    validate(cfg.run);
  } catch (const InputError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return cfg;
}

std::vector<ClientHistory> load_pool(const RunConfig& cfg,
                                     const std::optional<std::filesystem::path>& histories,
                                     unsigned threads) {
  if (!histories) return gen_pool(cfg.num_clients_total, cfg.client, cfg.seed, threads);
  std::vector<ClientHistory> pool = read_histories(*histories);
  if (pool.size() != cfg.num_clients_total) {
    throw ConfigError(histories->string() + " holds " + std::to_string(pool.size()) +
                      " clients, config expects " + std::to_string(cfg.num_clients_total));
  }
  return pool;
}

std::vector<ClientId> ids_of(const std::vector<ClientHistory>& pool) {
  std::vector<ClientId> ids;
  ids.reserve(pool.size());
  for (const ClientHistory& c : pool) ids.push_back(c.client_id);
  return ids;
}

void print_params(std::ostream& out, const ModelParams& p) {
  for (std::size_t i = 0; i < kNumWeights; ++i) {
    out << "  " << kWeightNames[i] << " " << format_double(p[i]) << "\n";
  }
}

}  // namespace

void cmd_gen_data(const GenDataOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load(opts.config, opts.seed);
  const std::vector<ClientHistory> pool =
      gen_pool(cfg.run.num_clients_total, cfg.run.client, cfg.run.seed, opts.threads);
  write_histories(opts.out, pool);

  std::size_t pages = 0;
  std::size_t visits = 0;
  std::size_t bookmarked = 0;
  for (const ClientHistory& c : pool) {
    pages += c.pages.size();
    for (const Page& p : c.pages) {
      visits += p.visits.size();
      bookmarked += p.bookmarked ? 1 : 0;
    }
  }
  out << "clients " << pool.size() << "\n"
      << "pages " << pages << "\n"
      << "stored_visits " << visits << "\n"
      << "bookmarked_pages " << bookmarked << "\n"
      << "wrote " << opts.out.string() << "\n";
}

void cmd_train(const TrainOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load(opts.config, opts.seed);
  std::optional<ServerState> resume;
  if (opts.resume) {
    resume = read_snapshot(*opts.resume);
    if (resume->seed != cfg.run.seed) {
      throw ConfigError("snapshot " + opts.resume->string() + " was written with seed " +
                        std::to_string(resume->seed) + ", config has " +
                        std::to_string(cfg.run.seed));
    }
  }
  const std::vector<ClientHistory> pool = load_pool(cfg.run, opts.histories, opts.threads);
  const std::vector<ClientId> ids = ids_of(pool);
  const LocalTraining local{cfg.run.truth, cfg.run.client, cfg.run.loss, cfg.run.grad};

  std::error_code ec;
  std::filesystem::create_directories(opts.out, ec);
  if (ec) throw IoError("cannot create " + opts.out.string() + ": " + ec.message());
  write_file(opts.out / "config.txt", format_config(cfg));

  RunWriter writer(opts.out, resume.has_value());
  const RunRecord record = run_training(cfg.run, ids, simulated_clients(pool, local), &writer,
                                        opts.threads, resume);

  const std::int64_t first = resume ? resume->iteration : 0;
  out << "iterations " << first << ".." << first + static_cast<std::int64_t>(record.iterations.size())
      << "\n";
  if (!record.iterations.empty()) {
    out << "final_mean_loss " << format_double(record.iterations.back().mean_loss) << "\n";
  }
  out << "final_params\n";
  print_params(out, record.final_params);
  out << "snapshot " << record.snapshot_ids.back() << "\n"
      << "wall_clock_seconds " << std::fixed << std::setprecision(3) << record.wall_clock_seconds
      << std::defaultfloat << "\n";
}

void cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load(opts.config, opts.seed);
  const ServerState snapshot = read_snapshot(opts.snapshot);
  const std::vector<ClientHistory> pool = load_pool(cfg.run, opts.histories, opts.threads);

  const std::vector<ArmSpec> arms = standard_arms(snapshot.params, cfg.eval.decay_rate);
  const std::vector<ArmSamples> samples =
      run_evaluation(pool, arms, cfg.run.truth, cfg.run.client, cfg.eval.rounds, opts.threads);
  const EvalReport report = compare_arms(samples, cfg.eval.alpha, cfg.eval.num_comparisons);
  write_file(opts.out, format_eval_csv(report));

  out << "corrected_alpha " << format_double(report.corrected_alpha) << "\n";
  for (const ArmMetricRow& r : report.rows) {
    out << r.arm << " " << r.metric << " mean " << format_double(r.mean) << " n " << r.n << " vs "
        << r.compared_to << " p " << format_double(r.p) << (r.significant ? " significant" : "")
        << "\n";
  }
  out << "wrote " << opts.out.string() << "\n";
}

void cmd_stability(const StabilityOptions& opts, std::ostream& out) {
  StabilityConfig st;
  std::uint64_t seed = RunConfig{}.seed;
  if (opts.config) {
    const ExperimentConfig cfg = load(*opts.config, opts.seed);
    st = cfg.stability;
    seed = cfg.run.seed;
  }
  if (opts.seed) seed = *opts.seed;
  if (opts.sample_size) st.sample_size = *opts.sample_size;
  if (opts.trials) st.trials = *opts.trials;
  if (st.sample_size == 0) throw ConfigError("sample size must be >= 1");
  if (st.trials == 0) throw ConfigError("trials must be >= 1");

  const std::vector<ClientUpdate> log = read_update_log(opts.log);
  const StabilityReport report = stability_study(log, st.sample_size, st.trials, seed, opts.threads);
  write_file(opts.out, format_stability_csv(report));

  const auto subsampled = std::count_if(report.rows.begin(), report.rows.end(),
                                        [](const StabilityRow& r) { return r.subsampled; });
  out << "updates " << log.size() << "\n"
      << "iterations " << report.rows.size() << "\n"
      << "subsampled_iterations " << subsampled << "\n"
      << "wrote " << opts.out.string() << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated frecency-weight training simulator", "fedrank"};
  app.require_subcommand(1);

  GenDataOptions gen;
  TrainOptions train;
  EvaluateOptions eval;
  StabilityOptions stab;
  std::uint64_t seed = 0;
  std::string resume;
  std::string histories;
  std::string stab_config;
  std::size_t sample_size = 0;
  std::size_t trials = 0;

  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic client pool");
  gen_cmd->add_option("-c,--config", gen.config, "Run configuration")->required();
  gen_cmd->add_option("-o,--out", gen.out, "Output JSONL file")->required();
  auto* gen_seed = gen_cmd->add_option("--seed", seed, "Override the configured seed");
  gen_cmd->add_option("--threads", gen.threads, "Worker threads (0 = all cores)");

  auto* train_cmd = app.add_subcommand("train", "Run federated training");
  train_cmd->add_option("-c,--config", train.config, "Run configuration")->required();
  train_cmd->add_option("-o,--out", train.out, "Run directory")->required();
  auto* train_seed = train_cmd->add_option("--seed", seed, "Override the configured seed");
  train_cmd->add_option("--threads", train.threads, "Worker threads (0 = all cores)");
  auto* train_resume = train_cmd->add_option("--resume", resume, "Snapshot to continue from");
  auto* train_hist = train_cmd->add_option("--histories", histories, "Pool from gen-data");

  auto* eval_cmd = app.add_subcommand("evaluate", "Compare a snapshot against the control arms");
  eval_cmd->add_option("-c,--config", eval.config, "Run configuration")->required();
  eval_cmd->add_option("-s,--snapshot", eval.snapshot, "Model snapshot")->required();
  eval_cmd->add_option("-o,--out", eval.out, "Output CSV")->required();
  auto* eval_seed = eval_cmd->add_option("--seed", seed, "Override the configured seed");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = all cores)");
  auto* eval_hist = eval_cmd->add_option("--histories", histories, "Pool from gen-data");

  auto* stab_cmd = app.add_subcommand("stability", "Subsampled-update stability study");
  stab_cmd->add_option("-l,--log", stab.log, "updates.jsonl from a training run")->required();
  stab_cmd->add_option("-o,--out", stab.out, "Output CSV")->required();
  auto* stab_cfg = stab_cmd->add_option("-c,--config", stab_config, "Run configuration");
  auto* stab_seed = stab_cmd->add_option("--seed", seed, "Override the seed");
  auto* stab_size = stab_cmd->add_option("--sample-size", sample_size, "Updates per subsample");
  auto* stab_trials = stab_cmd->add_option("--trials", trials, "Subsamples per iteration");
  stab_cmd->add_option("--threads", stab.threads, "Worker threads (0 = all cores)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) {
      if (gen_seed->count()) gen.seed = seed;
      cmd_gen_data(gen, out);
    } else if (train_cmd->parsed()) {
      if (train_seed->count()) train.seed = seed;
      if (train_resume->count()) train.resume = resume;
      if (train_hist->count()) train.histories = histories;
      cmd_train(train, out);
    } else if (eval_cmd->parsed()) {
      if (eval_seed->count()) eval.seed = seed;
      if (eval_hist->count()) eval.histories = histories;
      cmd_evaluate(eval, out);
    } else if (stab_cmd->parsed()) {
      if (stab_cfg->count()) stab.config = stab_config;
      if (stab_seed->count()) stab.seed = seed;
      if (stab_size->count()) stab.sample_size = sample_size;
      if (stab_trials->count()) stab.trials = trials;
      cmd_stability(stab, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace fedrank::cli
