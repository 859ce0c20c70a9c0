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


#include "kgcd/kg_store.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "kgcd/error.hpp"
#include "oracles.hpp"

namespace kgcd {
namespace {

std::string triple(const std::string& h, const std::string& r, const std::string& t,
                   const std::string& ht = "Thing", const std::string& tt = "Thing") {
  return R"({"head":{"id":")" + h + R"(","name":")" + h + R"(","type":")" + ht +
         R"("},"relation":")" + r + R"(","tail":{"id":")" + t + R"(","name":")" + t +
         R"(","type":")" + tt + R"("}})" + "\n";
}

KnowledgeGraph from_text(const std::string& text,
                         KgFormat format = KgFormat::kTriplesJsonl) {
  std::istringstream in(text);
  return parse_kg(in, format);
}

std::vector<std::string> names(const MetapathSubgraph& sg) { return sg.node_names; }

TEST(KgLoad, DuplicateTriplesAreDropped) {
  auto kg = from_text(triple("A", "r1", "B") + triple("B", "r2", "C") + triple("A", "r1", "B"));
  EXPECT_EQ(kg.node_count(), 3u);
  EXPECT_EQ(kg.edge_count(), 2u);
  EXPECT_EQ(kg.stats().duplicates_dropped, 1u);
  EXPECT_EQ(kg.stats().nodes, 3u);
  EXPECT_EQ(kg.stats().edges, 2u);
}

TEST(KgLoad, EmptyFileGivesEmptyGraph) {
  auto kg = from_text("");
  EXPECT_EQ(kg.node_count(), 0u);
  EXPECT_EQ(kg.edge_count(), 0u);
  EXPECT_EQ(kg.stats().duplicates_dropped, 0u);
}

TEST(KgLoad, UndeclaredEndpointNamesTheId) {
  const std::string text = triple("A", "r", "B") +
                           R"({"head":{"id":"A"},"relation":"r","tail":{"id":"ghost"}})" "\n";
  try {
    from_text(text);
    FAIL() << "expected a load error";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos) << e.what();
  }
}

TEST(KgLoad, MalformedLineReportsLineNumber) {
  try {
    from_text(triple("A", "r", "B") + "{not json\n");
    FAIL() << "expected a load error";
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(KgLoad, ParallelEdgesWithDistinctRelationsAreKept) {
  auto kg = from_text(triple("A", "r1", "B") + triple("A", "r2", "B"));
  EXPECT_EQ(kg.edge_count(), 2u);
}

TEST(KgLoad, TsvFormat) {
  auto kg = from_text("g1\tFGF6\tGene\tupregulates\ta1\ttendon\tAnatomy\n",
                      KgFormat::kTriplesTsv);
  ASSERT_EQ(kg.node_count(), 2u);
  auto ids = kg.resolve("fgf6");
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(kg.node(ids[0]).node_type, "Gene");
  EXPECT_THROW(from_text("a\tb\tc\n", KgFormat::kTriplesTsv), LoadError);
}

TEST(KgLoad, MissingFileIsIoError) {
  EXPECT_THROW(load_kg("/nonexistent/kg.jsonl", KgFormat::kTriplesJsonl), IoError);
}

TEST(KgLoad, FormatIds) {
  EXPECT_EQ(parse_kg_format("triples-jsonl"), KgFormat::kTriplesJsonl);
  EXPECT_EQ(parse_kg_format("triples-tsv"), KgFormat::kTriplesTsv);
  EXPECT_THROW(parse_kg_format("csv"), InvalidArgument);
}

TEST(KgIndex, NameResolutionIsCaseInsensitiveAndKeepsCollisions) {
  std::vector<NodeRecord> nodes = {{"2", "Aspirin", "Compound"},
                                   {"1", "aspirin", "Compound"},
                                   {"3", "Pain", "Symptom"}};
  auto kg = KnowledgeGraph::FromRecords(nodes, {});
  auto ids = kg.resolve("ASPIRIN");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(kg.node(ids[0]).id, "1");
  EXPECT_EQ(kg.node(ids[1]).id, "2");
  EXPECT_TRUE(kg.resolve("aspirin tablet").empty());
  EXPECT_EQ(kg.nodes_of_type("Compound").size(), 2u);
}

TEST(KgIndex, RejectsInvalidNodes) {
  EXPECT_THROW(KnowledgeGraph::FromRecords({{"1", "", "T"}}, {}), LoadError);
  EXPECT_THROW(KnowledgeGraph::FromRecords({{"1", "a", "T"}, {"1", "b", "T"}}, {}),
               LoadError);
  EXPECT_THROW(KnowledgeGraph::FromRecords({{"1", "a", "T"}}, {{"1", "r", "2"}}),
               LoadError);
}

TEST(Enumerate, ChainGivesOnePath) {
  auto kg = from_text(triple("a", "r", "x") + triple("x", "s", "b"));
  auto paths = enumerate_subgraphs(kg, "a", "b", 2, 10, 0);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(names(paths[0]), (std::vector<std::string>{"a", "x", "b"}));
  EXPECT_EQ(paths[0].edge_labels, (std::vector<std::string>{"r", "s"}));
}

TEST(Enumerate, DiamondGivesBothPathsInOrder) {
  auto kg = from_text(triple("a", "r", "y") + triple("y", "r", "b") +
                      triple("a", "r", "x") + triple("x", "r", "b"));
  auto paths = enumerate_subgraphs(kg, "a", "b", 2, 10, 0);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(names(paths[0]), (std::vector<std::string>{"a", "x", "b"}));
  EXPECT_EQ(names(paths[1]), (std::vector<std::string>{"a", "y", "b"}));
}

TEST(Enumerate, DirectEdgeSuppressesLongerPaths) {
  auto kg = from_text(triple("a", "r", "x") + triple("x", "r", "b") +
                      triple("a", "r", "y") + triple("y", "r", "b") +
                      triple("a", "direct", "b"));
  auto paths = enumerate_subgraphs(kg, "a", "b", 2, 10, 0);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(names(paths[0]), (std::vector<std::string>{"a", "b"}));
}

TEST(Enumerate, RecordsDirectionButTraversesBothWays) {
  auto kg = from_text(triple("x", "r", "a") + triple("x", "s", "b"));
  auto paths = enumerate_subgraphs(kg, "a", "b", 2, 10, 0);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].edge_directions,
            (std::vector<EdgeDirection>{EdgeDirection::kReverse, EdgeDirection::kForward}));
}

TEST(Enumerate, AntiParallelEdgesStayDistinct) {
  auto kg = from_text(triple("a", "r", "b") + triple("b", "r", "a"));
  auto paths = enumerate_subgraphs(kg, "a", "b", 1, 10, 0);
  EXPECT_EQ(paths.size(), 2u);
}

TEST(Enumerate, TooFarIsEmptyAndUnknownNameThrows) {
  auto kg = from_text(triple("a", "r", "x") + triple("x", "r", "y") + triple("y", "r", "b"));
  EXPECT_TRUE(enumerate_subgraphs(kg, "a", "b", 2, 10, 0).empty());
  EXPECT_EQ(enumerate_subgraphs(kg, "a", "b", 3, 10, 0).size(), 1u);
  EXPECT_THROW(enumerate_subgraphs(kg, "a", "nowhere", 2, 10, 0), NoSuchNode);
  EXPECT_THROW(enumerate_subgraphs(kg, "a", "b", 0, 10, 0), InvalidArgument);
  EXPECT_THROW(enumerate_subgraphs(kg, "a", "b", 5, 10, 0), InvalidArgument);
  EXPECT_THROW(enumerate_subgraphs(kg, "a", "b", 2, 0, 0), InvalidArgument);
}

TEST(Enumerate, LimitSamplesDeterministically) {
  std::string text;
  for (int i = 0; i < 30; ++i) {
    const std::string mid = "m" + std::to_string(100 + i);
    text += triple("a", "r", mid) + triple(mid, "r", "b");
  }
  auto kg = from_text(text);
  auto all = enumerate_subgraphs(kg, "a", "b", 2, kNoLimit, 0);
  ASSERT_EQ(all.size(), 30u);
  auto s1 = enumerate_subgraphs(kg, "a", "b", 2, 5, 42);
  auto s2 = enumerate_subgraphs(kg, "a", "b", 2, 5, 42);
  ASSERT_EQ(s1.size(), 5u);
  EXPECT_EQ(s1, s2);
  EXPECT_TRUE(std::is_sorted(s1.begin(), s1.end()));
  for (const auto& p : s1) {
    EXPECT_NE(std::find(all.begin(), all.end(), p), all.end());
  }
}

TEST(Enumerate, MatchesBruteForceOracleOnRandomGraphs) {
  std::size_t nonempty = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto g = oracle::random_graph(seed, 25);
    auto kg = KnowledgeGraph::FromRecords(g.nodes, g.edges);
    for (int trial = 0; trial < 3; ++trial) {
      const auto& a = g.nodes[(seed + trial) % g.nodes.size()];
      const auto& b = g.nodes[(seed * 7 + trial * 3 + 1) % g.nodes.size()];
      if (a.id == b.id) continue;
      for (int hops = 1; hops <= 3; ++hops) {
        auto expected = oracle::all_shortest_paths(g.nodes, g.edges, a.id, b.id, hops);
        auto got = enumerate_subgraphs(kg, a.name, b.name, hops, kNoLimit, 0);
        ASSERT_EQ(got, expected) << "seed " << seed << " hops " << hops;
        nonempty += got.empty() ? 0 : 1;
      }
    }
  }
  EXPECT_GT(nonempty, 100u);
}

TEST(Enumerate, EveryResultSatisfiesSubgraphInvariants) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto g = oracle::random_graph(seed, 30);
    auto kg = KnowledgeGraph::FromRecords(g.nodes, g.edges);
    const auto& a = g.nodes.front();
    const auto& b = g.nodes.back();
    if (a.id == b.id) continue;
    for (const auto& p : enumerate_subgraphs(kg, a.name, b.name, 4, kNoLimit, 0)) {
      EXPECT_EQ(check_subgraph(p), "");
      EXPECT_EQ(p.node_ids.front(), a.id);
      EXPECT_EQ(p.node_ids.back(), b.id);
    }
  }
}

class PatternQueryTest : public ::testing::Test {
 protected:
  void SetUp() override {
    kg_ = from_text(triple("c1", "TARGETS", "g1", "Compound", "Gene") +
                    triple("g1", "ASSOCIATED_WITH", "d1", "Gene", "Disease") +
                    triple("c1", "TARGETS", "g2", "Compound", "Gene") +
                    triple("d1", "ASSOCIATED_WITH", "g2", "Disease", "Gene") +
                    triple("c1", "RESEMBLES", "c2", "Compound", "Compound") +
                    triple("c2", "TREATS", "d1", "Compound", "Disease"));
  }
  KnowledgeGraph kg_;
};

TEST_F(PatternQueryTest, TypePatternFindsBothGeneIntermediaries) {
  const std::vector<std::string> types = {"Compound", "Gene", "Disease"};
  auto paths = pattern_query(kg_, "c1", "d1", types);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(names(paths[0]), (std::vector<std::string>{"c1", "g1", "d1"}));
  EXPECT_EQ(names(paths[1]), (std::vector<std::string>{"c1", "g2", "d1"}));
  EXPECT_EQ(paths[1].edge_directions[1], EdgeDirection::kReverse);
}

TEST_F(PatternQueryTest, RelationPatternFilters) {
  const std::vector<std::string> types = {"Compound", "Gene", "Disease"};
  const std::vector<std::string> rels = {"TARGETS", "ASSOCIATED_WITH"};
  EXPECT_EQ(pattern_query(kg_, "c1", "d1", types, rels).size(), 2u);
  const std::vector<std::string> wrong = {"TARGETS", "TREATS"};
  EXPECT_TRUE(pattern_query(kg_, "c1", "d1", types, wrong).empty());
}

TEST_F(PatternQueryTest, NoDirectCompoundDiseaseEdge) {
  const std::vector<std::string> types = {"Compound", "Disease"};
  EXPECT_TRUE(pattern_query(kg_, "c1", "d1", types).empty());
}

TEST_F(PatternQueryTest, LongerShapesAllowedAndValidated) {
  const std::vector<std::string> types = {"Compound", "Compound", "Disease"};
  auto paths = pattern_query(kg_, "c1", "d1", types);
  ASSERT_EQ(paths.size(), 1u);
  const std::vector<std::string> one = {"Compound"};
  EXPECT_THROW(pattern_query(kg_, "c1", "d1", one), InvalidArgument);
  const std::vector<std::string> bad_rels = {"TARGETS"};
  EXPECT_THROW(pattern_query(kg_, "c1", "d1", std::vector<std::string>{"Compound", "Gene", "Disease"}, bad_rels),
               InvalidArgument);
  EXPECT_THROW(pattern_query(kg_, "c1", "zzz", types), NoSuchNode);
}

MetapathSubgraph numbered(int i) {
  MetapathSubgraph sg;
  sg.node_ids = {"a", "m" + std::to_string(1000 + i), "b"};
  sg.node_names = sg.node_ids;
  sg.node_types = {"T", "T", "T"};
  sg.edge_labels = {"r", "r"};
  sg.edge_directions = {EdgeDirection::kForward, EdgeDirection::kForward};
  return sg;
}

TEST(Sample, IdentityWhenSmall) {
  std::vector<MetapathSubgraph> three = {numbered(2), numbered(0), numbered(1)};
  EXPECT_EQ(sample_subgraphs(three, 10, 1), three);
  std::vector<MetapathSubgraph> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(numbered(i));
  EXPECT_EQ(sample_subgraphs(ten, 10, 1), ten);
  EXPECT_THROW(sample_subgraphs(ten, 0, 1), InvalidArgument);
}

TEST(Sample, SeededAndOrderPreserving) {
  std::vector<MetapathSubgraph> many;
  for (int i = 0; i < 100; ++i) many.push_back(numbered(i));
  auto s1 = sample_subgraphs(many, 10, 1);
  auto s2 = sample_subgraphs(many, 10, 2);
  EXPECT_EQ(s1, sample_subgraphs(many, 10, 1));
  EXPECT_EQ(s2, sample_subgraphs(many, 10, 2));
  EXPECT_NE(s1, s2);
  ASSERT_EQ(s1.size(), 10u);
  EXPECT_TRUE(std::is_sorted(s1.begin(), s1.end()));
  std::set<std::vector<std::string>> distinct;
  for (const auto& s : s1) distinct.insert(s.node_ids);
  EXPECT_EQ(distinct.size(), 10u);
}

TEST(Sample, RoughlyUniform) {
  std::vector<MetapathSubgraph> items;
  for (int i = 0; i < 20; ++i) items.push_back(numbered(i));
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    for (const auto& s : sample_subgraphs(items, 5, seed)) ++hits[s.node_ids[1]];
  }
  // Expected 1000 hits per item; binomial sd is about 27.
  for (const auto& [id, count] : hits) {
    EXPECT_NEAR(count, 1000, 150) << id;
  }
}

TEST(SubgraphJson, RoundTripAndValidation) {
  MetapathSubgraph sg = numbered(3);
  sg.edge_directions[1] = EdgeDirection::kReverse;
  EXPECT_EQ(subgraph_from_json(subgraph_to_json(sg)), sg);
  MetapathSubgraph bad = sg;
  bad.edge_labels.pop_back();
  EXPECT_NE(check_subgraph(bad), "");
  MetapathSubgraph loop = sg;
  loop.node_ids[2] = "a";
  EXPECT_NE(check_subgraph(loop), "");
}

}  // namespace
}  // namespace kgcd
