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

#include <numeric>
#include <vector>

#include "fedrank/evaluation.hpp"

namespace fedrank {
namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

TEST(StandardArms, Shape) {
  ModelParams t = ModelParams::defaults();
  t.type[1] = 3.0;
  const auto arms = standard_arms(t, 0.025);
  ASSERT_EQ(arms.size(), 3u);
  EXPECT_EQ(arms[0].name, "treatment");
  EXPECT_EQ(arms[0].params, t);
  EXPECT_EQ(arms[0].decay_rate, 0.0);
  EXPECT_EQ(arms[1].name, "control");
  EXPECT_EQ(arms[1].params, ModelParams::defaults());
  EXPECT_EQ(arms[1].decay_rate, 0.025);
  EXPECT_EQ(arms[2].name, "control-no-decay");
  EXPECT_EQ(arms[2].decay_rate, 0.0);
}

TEST(RunEvaluation, IdenticalModelsGiveIdenticalSamples) {
  const ClientConfig cfg;
  const auto pool = gen_pool(50, cfg, 4);
  const auto arms = standard_arms(ModelParams::defaults(), 0.025);
  const auto samples = run_evaluation(pool, arms, ModelParams::defaults(), cfg, 2);
  ASSERT_EQ(samples.size(), 3u);
  EXPECT_EQ(samples[0].chars_typed, samples[2].chars_typed);
  EXPECT_EQ(samples[0].selected_rank, samples[2].selected_rank);
  EXPECT_EQ(samples[0].chars_typed.size(), samples[1].chars_typed.size());
  const EvalReport rep = compare_arms(samples);
  EXPECT_FALSE(rep.rows[0].significant);  // treatment vs control, chars
  EXPECT_EQ(rep.rows[4].p, 1.0);          // control-no-decay vs treatment
}

TEST(RunEvaluation, DeterministicAndThreadIndependent) {
  const ClientConfig cfg;
  const auto pool = gen_pool(40, cfg, 5);
  ModelParams t = ModelParams::defaults();
  t.recency[0] = 40.0;
  const auto arms = standard_arms(t, 0.025);
  const auto a = run_evaluation(pool, arms, ModelParams::defaults(), cfg, 2, 1);
  const auto b = run_evaluation(pool, arms, ModelParams::defaults(), cfg, 2, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].chars_typed, b[i].chars_typed);
    EXPECT_EQ(a[i].selected_rank, b[i].selected_rank);
  }
}

TEST(RunEvaluation, EventsDisjointFromTraining) {
  // Evaluation rounds draw from their own stream, so round r of evaluation is
  // not a replay of training iteration r.
  const ClientConfig cfg;
  const ClientHistory h = gen_history(3, cfg, 6);
  Rng train = round_rng(h, 0);
  Rng eval = evaluation_rng(h, 0);
  EXPECT_NE(train.next_u64(), eval.next_u64());
}

TEST(RunEvaluation, WorseModelTypesMore) {
  const ClientConfig cfg;
  const auto pool = gen_pool(400, cfg, 7);
  ModelParams bad = ModelParams::defaults();
  bad.type = {2.0, 0.1, 0.1};
  bad.recency = {10, 10, 10, 10, 10};
  const std::vector<ArmSpec> arms{{"good", ModelParams::defaults(), 0.0}, {"bad", bad, 0.0}};
  const auto s = run_evaluation(pool, arms, ModelParams::defaults(), cfg, 3);
  EXPECT_LT(mean(s[0].chars_typed), mean(s[1].chars_typed));
  EXPECT_LT(mean(s[0].selected_rank), mean(s[1].selected_rank));
}

}  // namespace
}  // namespace fedrank
