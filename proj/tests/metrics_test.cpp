// Copyright 2026 The kgcd Authors.
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


#include "kgcd/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgcd/random.hpp"
#include "oracles.hpp"

namespace kgcd {
namespace {

TEST(Ndcg, IdealOrderingIsOne) {
  std::vector<double> g = {2.0, 1.5, 1.0, 0.2};
  for (std::size_t k = 1; k <= 5; ++k) EXPECT_NEAR(ndcg_at_k(g, k), 1.0, 1e-12);
}

TEST(Ndcg, SingleRelevantItemAtSecondPosition) {
  std::vector<double> g = {0.0, 1.0};
  EXPECT_NEAR(ndcg_at_k(g, 2), 1.0 / std::log2(3.0), 1e-12);
  EXPECT_NEAR(ndcg_at_k(g, 2), 0.63093, 1e-5);
  EXPECT_DOUBLE_EQ(ndcg_at_k(g, 1), 0.0);
}

TEST(Ndcg, ZeroIdealScoresOne) {
  std::vector<double> g = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(ndcg_at_k(g, 2), 1.0);
}

TEST(Ndcg, NotMonotoneInKForGradedGains) {
  // A strong item buried at position 3 lowers NDCG@2 below NDCG@1.
  std::vector<double> g = {1.0, 0.0, 2.0};
  EXPECT_GT(ndcg_at_k(g, 1), ndcg_at_k(g, 2));
  EXPECT_NEAR(ndcg_at_k(g, 1), oracle::ndcg(g, 1), 1e-12);
  EXPECT_NEAR(ndcg_at_k(g, 2), oracle::ndcg(g, 2), 1e-12);
}

TEST(Recall, Examples) {
  std::vector<bool> r = {true, false, true, false};
  EXPECT_DOUBLE_EQ(recall_at_k(r, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(r, 3, 2), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(r, 10, 2), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k({false, false}, 1, 0), 1.0);
}

// Every ordering of every small gain list, checked against brute force.
TEST(Metrics, MatchBruteForceOnExhaustiveRankings) {
  Engine rng(2024);
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> gains(n);
      for (auto& g : gains) g = std::floor(uniform01(rng) * 3.0);  // graded 0..2
      std::sort(gains.begin(), gains.end());
      do {
        std::vector<bool> rel;
        for (double g : gains) rel.push_back(g > 0.0);
        const auto total = static_cast<std::size_t>(std::count(rel.begin(), rel.end(), true));
        double prev_recall = 0.0;
        for (std::size_t k = 1; k <= n + 1; ++k) {
          const double nd = ndcg_at_k(gains, k);
          ASSERT_NEAR(nd, oracle::ndcg(gains, k), 1e-12);
          ASSERT_GE(nd, 0.0);
          ASSERT_LE(nd, 1.0 + 1e-12);
          const double rc = recall_at_k(rel, k, total);
          ASSERT_DOUBLE_EQ(rc, oracle::recall(rel, k));
          ASSERT_GE(rc, prev_recall);
          prev_recall = rc;
          ++checked;
        }
      } while (std::next_permutation(gains.begin(), gains.end()));
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Dcg, HandValue) {
  std::vector<double> g = {3.0, 2.0, 3.0};
  EXPECT_NEAR(dcg_at_k(g, 3), 3.0 + 2.0 / std::log2(3.0) + 3.0 / 2.0, 1e-12);
  EXPECT_NEAR(dcg_at_k(g, 3), oracle::dcg(g, 3), 1e-12);
}

}  // namespace
}  // namespace kgcd
