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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fedrank/cli.hpp"
#include "fedrank/persistence.hpp"
#include "fixtures.hpp"

namespace fedrank {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

constexpr const char* kSmallConfig =
    "num_clients_total = 100\n"
    "clients_per_iteration = 30\n"
    "num_iterations = 5\n"
    "seed = 4\n"
    "init.weights = 40, 70, 50, 30, 10, 1.2, 0.5, 1.4\n"
    "client.pages_min = 50\n"
    "client.pages_max = 50\n"
    "eval.rounds = 1\n"
    "stability.sample_size = 5\n"
    "stability.trials = 4\n";

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") { write_file(dir_ / "run.cfg", kSmallConfig); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string cfg() const { return path("run.cfg"); }

  testing::TempDir dir_;
};

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST_F(CliTest, GenDataCountsAndDeterminism) {
  const Result r = run({"gen-data", "-c", cfg(), "-o", path("a.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("clients 100\n"), std::string::npos);
  EXPECT_NE(r.out.find("pages 5000\n"), std::string::npos);
  const auto pool = read_histories(path("a.jsonl"));
  EXPECT_EQ(pool.size(), 100u);
  std::size_t pages = 0;
  for (const auto& c : pool) pages += c.pages.size();
  EXPECT_EQ(pages, 5000u);

  ASSERT_EQ(run({"gen-data", "-c", cfg(), "-o", path("b.jsonl"), "--threads", "3"}).code, 0);
  EXPECT_EQ(read_file(path("a.jsonl")), read_file(path("b.jsonl")));
  ASSERT_EQ(run({"gen-data", "-c", cfg(), "-o", path("c.jsonl"), "--seed", "5"}).code, 0);
  EXPECT_NE(read_file(path("a.jsonl")), read_file(path("c.jsonl")));
}

TEST_F(CliTest, TrainZeroIterations) {
  write_file(path("zero.cfg"), std::string(kSmallConfig) + "num_iterations = 0\n");
  // Duplicate key: rejected.
  EXPECT_EQ(run({"train", "-c", path("zero.cfg"), "-o", path("z")}).code, 1);
  EXPECT_FALSE(fs::exists(path("z")));

  std::string text = kSmallConfig;
  text.replace(text.find("num_iterations = 5"), 18, "num_iterations = 0");
  write_file(path("zero.cfg"), text);
  const Result r = run({"train", "-c", path("zero.cfg"), "-o", path("z")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(files_under(path("z/snapshots")), (std::vector<fs::path>{"snapshot_000000.txt"}));
  EXPECT_EQ(read_file(path("z/updates.jsonl")), "");
  EXPECT_EQ(read_file(path("z/loss.csv")),
            "iteration,mean_loss,median_loss,num_updates,rolling5_loss\n");
}

TEST_F(CliTest, TrainIsByteIdenticalAcrossThreadCounts) {
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("one"), "--threads", "1"}).code, 0);
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("four"), "--threads", "4"}).code, 0);
  const auto files = files_under(path("one"));
  EXPECT_EQ(files, files_under(path("four")));
  EXPECT_EQ(files.size(), 6u + 4u);  // 6 snapshots, updates, iterations, loss, config
  for (const fs::path& f : files) {
    EXPECT_EQ(read_file(fs::path(path("one")) / f), read_file(fs::path(path("four")) / f)) << f;
  }
}

TEST_F(CliTest, ResumeContinuesTheSameTrajectory) {
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("full")}).code, 0);

  std::string text = kSmallConfig;
  text.replace(text.find("num_iterations = 5"), 18, "num_iterations = 2");
  write_file(path("short.cfg"), text);
  ASSERT_EQ(run({"train", "-c", path("short.cfg"), "-o", path("split")}).code, 0);
  const Result r = run({"train", "-c", cfg(), "-o", path("split"), "--resume",
                        path("split/snapshots/snapshot_000002.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const fs::path& f : files_under(path("full"))) {
    if (f == "config.txt") continue;
    EXPECT_EQ(read_file(fs::path(path("full")) / f), read_file(fs::path(path("split")) / f)) << f;
  }
}

TEST_F(CliTest, ResumeWithOtherSeedRejected) {
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("a")}).code, 0);
  const Result r = run({"train", "-c", cfg(), "-o", path("b"), "--seed", "9", "--resume",
                        path("a/snapshots/snapshot_000003.txt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(path("b")));
}

TEST_F(CliTest, TrainFromGeneratedHistoriesMatchesRegenerated) {
  ASSERT_EQ(run({"gen-data", "-c", cfg(), "-o", path("h.jsonl")}).code, 0);
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("a")}).code, 0);
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("b"), "--histories", path("h.jsonl")}).code, 0);
  EXPECT_EQ(read_file(path("a/updates.jsonl")), read_file(path("b/updates.jsonl")));
}

TEST_F(CliTest, InvalidConfigWritesNothing) {
  write_file(path("bad.cfg"), std::string(kSmallConfig) + "colour = blue\n");
  for (const std::string sub : {"gen-data", "train", "evaluate"}) {
    std::vector<std::string> args{sub, "-c", path("bad.cfg"), "-o", path("out_" + sub)};
    if (sub == "evaluate") {
      args.push_back("-s");
      args.push_back(path("nothing.txt"));
    }
    const Result r = run(args);
    EXPECT_EQ(r.code, 1) << sub;
    EXPECT_NE(r.err.find("colour"), std::string::npos);
    EXPECT_FALSE(fs::exists(path("out_" + sub))) << sub;
  }
  write_file(path("k.cfg"), "clients_per_iteration = 500\nnum_clients_total = 10\n");
  EXPECT_EQ(run({"train", "-c", path("k.cfg"), "-o", path("k")}).code, 1);
  EXPECT_FALSE(fs::exists(path("k")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"fly"}).code, 1);
  EXPECT_EQ(run({"train", "-c", cfg()}).code, 1);
  EXPECT_EQ(run({"train", "-c", path("missing.cfg"), "-o", path("m")}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, EvaluateShapeAndIdenticalModels) {
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("r")}).code, 0);
  const Result r = run({"evaluate", "-c", cfg(), "-s", path("r/snapshots/snapshot_000005.txt"),
                        "-o", path("eval.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(path("eval.csv"));
  EXPECT_EQ(csv.rfind("arm,metric,mean,n,U,p,significant\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);

  // A snapshot holding the default weights makes treatment and control-no-decay identical.
  ServerState s = read_snapshot(path("r/snapshots/snapshot_000000.txt"));
  s.params = ModelParams::defaults();
  write_snapshot(path("defaults.txt"), s);
  ASSERT_EQ(run({"evaluate", "-c", cfg(), "-s", path("defaults.txt"), "-o", path("d.csv")}).code, 0);
  const std::string d = read_file(path("d.csv"));
  std::istringstream lines(d);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u);
  auto mean_of = [](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells.at(2);
  };
  EXPECT_EQ(mean_of(rows[1]), mean_of(rows[5]));
  EXPECT_EQ(mean_of(rows[2]), mean_of(rows[6]));

  ASSERT_EQ(run({"evaluate", "-c", cfg(), "-s", path("defaults.txt"), "-o", path("d2.csv"),
                 "--threads", "3"})
                .code,
            0);
  EXPECT_EQ(read_file(path("d.csv")), read_file(path("d2.csv")));
}

TEST_F(CliTest, EvaluateMissingSnapshotIsRuntimeError) {
  const Result r = run({"evaluate", "-c", cfg(), "-s", path("none.txt"), "-o", path("e.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(path("e.csv")));
}

TEST_F(CliTest, Stability) {
  ASSERT_EQ(run({"train", "-c", cfg(), "-o", path("r")}).code, 0);
  const std::string input_before = read_file(path("r/updates.jsonl"));
  ASSERT_EQ(run({"stability", "-l", path("r/updates.jsonl"), "-o", path("s1.csv"), "-c", cfg()}).code, 0);
  ASSERT_EQ(run({"stability", "-l", path("r/updates.jsonl"), "-o", path("s2.csv"), "-c", cfg(),
                 "--threads", "4"})
                .code,
            0);
  EXPECT_EQ(read_file(path("s1.csv")), read_file(path("s2.csv")));
  EXPECT_EQ(read_file(path("r/updates.jsonl")), input_before);

  const std::string csv = read_file(path("s1.csv"));
  EXPECT_EQ(csv.rfind("iteration,mean_l1,std_l1\n", 0), 0u);
  // One row per iteration with more than sample_size updates.
  std::map<std::int64_t, int> per_iteration;
  for (const ClientUpdate& u : read_update_log(path("r/updates.jsonl"))) ++per_iteration[u.iteration];
  long qualifying = 0;
  for (const auto& [it, n] : per_iteration) qualifying += n > 5 ? 1 : 0;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), qualifying + 1);

  ASSERT_EQ(run({"stability", "-l", path("r/updates.jsonl"), "-o", path("s3.csv"), "-c", cfg(),
                 "--seed", "77"})
                .code,
            0);
  EXPECT_NE(read_file(path("s1.csv")), read_file(path("s3.csv")));
}

TEST_F(CliTest, StabilityEmptyLog) {
  write_file(path("empty.jsonl"), "");
  const Result r = run({"stability", "-l", path("empty.jsonl"), "-o", path("s.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("s.csv")), "iteration,mean_l1,std_l1\n");
}

TEST_F(CliTest, StabilityBadLogIsRuntimeError) {
  write_file(path("bad.jsonl"), "{\"client_id\": 1\n");
  EXPECT_EQ(run({"stability", "-l", path("bad.jsonl"), "-o", path("s.csv")}).code, 2);
  EXPECT_EQ(run({"stability", "-l", path("bad.jsonl"), "-o", path("s.csv"), "--trials", "0"}).code, 1);
}

}  // namespace
}  // namespace fedrank
