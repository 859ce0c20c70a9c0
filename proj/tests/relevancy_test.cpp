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


#include "kgcd/relevancy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fakes.hpp"
#include "kgcd/error.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"

namespace kgcd {
namespace {

using testing::ScriptedBackend;

MetapathSubgraph path_of(std::vector<std::string> names, std::vector<std::string> types,
                         std::vector<std::string> labels) {
  MetapathSubgraph sg;
  for (std::size_t i = 0; i < names.size(); ++i) sg.node_ids.push_back("id:" + names[i]);
  sg.node_names = std::move(names);
  sg.node_types = std::move(types);
  sg.edge_labels = std::move(labels);
  sg.edge_directions.assign(sg.edge_labels.size(), EdgeDirection::kForward);
  return sg;
}

MetapathSubgraph fgf6_path() {
  return path_of({"FGF6", "tendon", "SDRDL", "FGFR2", "prostate cancer"},
                 {"Gene", "Anatomy", "Gene", "Gene", "Disease"},
                 {"express", "express", "regulate", "associate"});
}

PairInstance dht_instance() {
  PairInstance p;
  p.qid = "1";
  p.e1 = "dihydrotachysterol";
  p.e2 = "hypercalcemia";
  p.context =
      "Severe hypercalcemia in a patient treated for hypoparathyroidism with "
      "dihydrotachysterol.";
  p.groundtruth = Label::kCausal;
  return p;
}

TEST(SrePrompt, MatchesReferenceLayout) {
  auto prompt = build_sre_prompt(dht_instance(), fgf6_path());
  EXPECT_NE(prompt.find("[Pair]:\ndihydrotachysterol and hypercalcemia"), std::string::npos);
  EXPECT_NE(prompt.find("[Textual context]:\nSevere hypercalcemia in a patient"),
            std::string::npos);
  EXPECT_NE(prompt.find("[Relation Paths]: FGF6 - tendon - SDRDL - FGFR2 - prostate cancer"),
            std::string::npos);
  EXPECT_EQ(prompt.rfind("[Relation]:"), prompt.size() - std::string("[Relation]:").size());
  EXPECT_EQ(prompt.find(std::string(kDefaultSreInstruction)), 0u);
  EXPECT_EQ(prompt, build_sre_prompt(dht_instance(), fgf6_path()));
}

TEST(SrePrompt, EmptyContextStillValid) {
  auto inst = dht_instance();
  inst.context.clear();
  auto prompt = build_sre_prompt(inst, fgf6_path());
  EXPECT_NE(prompt.find("[Textual context]:\n\n"), std::string::npos);
}

TEST(SrePrompt, MissingPlaceholderIsTemplateError) {
  EXPECT_THROW(build_sre_prompt(dht_instance(), fgf6_path(), "{instruction} {pair} {context}"),
               TemplateError);
  EXPECT_THROW(build_sre_prompt(dht_instance(), fgf6_path(), "{paths} {context}"),
               TemplateError);
}

TEST(RelevanceScore, FollowsCorrectnessRule) {
  EXPECT_NEAR(relevance_score(true, 0.8), 1.8, 1e-12);
  EXPECT_DOUBLE_EQ(relevance_score(true, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(relevance_score(false, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(relevance_score(false, 0.0), 1.0);
  EXPECT_NEAR(relevance_score(false, 0.3), 0.7, 1e-12);
}

TEST(ScoreSubgraph, CorrectAndIncorrectPredictions) {
  ScriptedBackend right({{"FGF6", "causal", 0.8}});
  auto s = score_subgraph(dht_instance(), fgf6_path(), right);
  EXPECT_TRUE(s.correct);
  EXPECT_NEAR(s.s, 1.8, 1e-12);
  EXPECT_NEAR(s.p, 0.8, 1e-12);
  EXPECT_NEAR(s.probscore, std::log(0.8), 1e-12);
  EXPECT_EQ(s.predicted, Label::kCausal);

  ScriptedBackend wrong({{"FGF6", "non-causal", 1.0}});
  auto w = score_subgraph(dht_instance(), fgf6_path(), wrong);
  EXPECT_FALSE(w.correct);
  EXPECT_DOUBLE_EQ(w.s, 0.0);
}

TEST(ScoreSubgraph, UnparseableIsNeutral) {
  ScriptedBackend vague({{"FGF6", "the answer is unclear", 0.9}});
  auto s = score_subgraph(dht_instance(), fgf6_path(), vague);
  EXPECT_FALSE(s.correct);
  EXPECT_DOUBLE_EQ(s.p, 0.0);
  EXPECT_DOUBLE_EQ(s.s, 1.0);
  EXPECT_FALSE(s.predicted.has_value());
}

TEST(ScoreSubgraph, BackendFailurePropagates) {
  ScriptedBackend down({{"FGF6", "", 1.0, true}});
  EXPECT_THROW(score_subgraph(dht_instance(), fgf6_path(), down), BackendUnavailable);
}

std::vector<MetapathSubgraph> lettered_paths(int n) {
  std::vector<MetapathSubgraph> out;
  for (int i = 0; i < n; ++i) {
    std::string mid = "mid" + std::string(1, static_cast<char>('A' + i));
    out.push_back(path_of({"dihydrotachysterol", mid, "hypercalcemia"},
                          {"Compound", "Gene", "Disease"}, {"r", "s"}));
  }
  return out;
}

TEST(RankPair, SortsByDescendingScore) {
  // s = [1.8, 0.3, 1.2]
  ScriptedBackend backend({{"midA", "causal", 0.8},
                           {"midB", "non-causal", 0.7},
                           {"midC", "causal", 0.2}});
  auto paths = lettered_paths(3);
  auto rec = rank_pair(dht_instance(), paths, backend);
  ASSERT_EQ(rec.metapaths.size(), 3u);
  EXPECT_EQ(rec.metapaths[0].stops, "dihydrotachysterol - midA - hypercalcemia");
  EXPECT_EQ(rec.metapaths[1].stops, "dihydrotachysterol - midC - hypercalcemia");
  EXPECT_EQ(rec.metapaths[2].stops, "dihydrotachysterol - midB - hypercalcemia");
  EXPECT_NEAR(rec.metapaths[0].relscore, 1.8, 1e-12);
  EXPECT_NEAR(rec.metapaths[1].relscore, 1.2, 1e-12);
  EXPECT_NEAR(rec.metapaths[2].relscore, 0.3, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rec.metapaths[i].pathid, i + 1);
  EXPECT_TRUE(rec.metapaths[0].relevant);
  EXPECT_FALSE(rec.metapaths[2].relevant);
  EXPECT_EQ(rec.metapaths[0].reltypes, "r - s");
  EXPECT_EQ(rec.metapaths[0].nodelabels, "Compound - Gene - Disease");
  EXPECT_EQ(backend.call_count(), 3u);
}

TEST(RankPair, TiesKeepInputOrder) {
  ScriptedBackend backend({}, "causal");
  auto paths = lettered_paths(5);
  auto rec = rank_pair(dht_instance(), paths, backend);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(rec.metapaths[i].stops, join(paths[i].node_names, " - "));
  }
}

TEST(RankPair, MockMotifRanksFirst) {
  MockOracleConfig cfg;
  cfg.causal_motifs = {{"compound", "mediator", "disease"}};
  cfg.base_confidence = 0.9;
  MockBackend mock(cfg);
  std::vector<MetapathSubgraph> paths;
  for (int i = 0; i < 5; ++i) {
    std::string mid = (i == 3 ? "mediator " : "gene ") + std::to_string(i);
    paths.push_back(path_of({"compound x", mid, "disease y"},
                            {"compound", i == 3 ? "mediator" : "gene", "disease"},
                            {"r", "s"}));
  }
  PairInstance inst{"q", "compound x", "disease y", "", Label::kCausal};
  auto rec = rank_pair(inst, paths, mock);
  EXPECT_EQ(rec.metapaths[0].stops, "compound x - mediator 3 - disease y");
  EXPECT_GT(rec.metapaths[0].relscore, 1.0);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(rec.metapaths[i].relscore, 1.0);
}

TEST(RankPair, ContractErrors) {
  ScriptedBackend backend({});
  EXPECT_THROW(rank_pair(dht_instance(), {}, backend), EmptyCandidates);
  SreOptions opt;
  opt.k_max = 2;
  auto paths = lettered_paths(3);
  EXPECT_THROW(rank_pair(dht_instance(), paths, backend, opt), InvalidArgument);
}

TEST(RankPair, ParallelScoringMatchesSerial) {
  MockOracleConfig cfg;
  cfg.causal_motifs = {{"compound", "gene", "disease"}};
  cfg.flip_rate = 0.3;
  cfg.noise_seed = 5;
  MockBackend a(cfg), b(cfg);
  auto paths = lettered_paths(8);
  SreOptions serial, parallel;
  parallel.parallelism = 4;
  EXPECT_EQ(rank_pair(dht_instance(), paths, a, serial),
            rank_pair(dht_instance(), paths, b, parallel));
}

RankedPairRecord sample_record() {
  RankedPairRecord r;
  r.qid = "1414";
  r.e1 = "carbamazepine";
  r.e2 = "systemic lupus erythematosus";
  r.groundtruth = Label::kCausal;
  r.metapaths.push_back({1, 1.41565, -0.7063895, true,
                         "Carbamazepine - Conjunctivitis - Dasatinib - Systemic lupus erythematosus rash",
                         "CAUSESCcSE - CAUSESCcSE - CAUSESCcSE",
                         "Compound - SideEffect - Compound - SideEffect"});
  r.metapaths.push_back({2, 0.53165, -0.6528874, false,
                         "Carbamazepine - Renal failure - Dasatinib - Systemic lupus erythematosus rash",
                         "CAUSESCcSE - CAUSESCcSE - CAUSESCcSE",
                         "Compound - SideEffect - Compound - SideEffect"});
  return r;
}

TEST(RankedRecord, SerializesWithReferenceKeysAndFlags) {
  auto j = ranked_record_to_json(sample_record());
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"qid", "e1", "e2", "groundtruth", "metapaths"}));
  EXPECT_EQ(j["groundtruth"], "1");
  std::vector<std::string> path_keys;
  for (auto& [k, v] : j["metapaths"][0].items()) path_keys.push_back(k);
  EXPECT_EQ(path_keys, (std::vector<std::string>{"pathid", "relscore", "probscore", "relevant",
                                                 "stops", "reltypes", "nodelabels"}));
  EXPECT_EQ(j["metapaths"][0]["relevant"], "1");
  EXPECT_EQ(j["metapaths"][1]["relevant"], "0");
  EXPECT_TRUE(validate_ranked_record_json(j).empty());
}

TEST(RankedRecord, RoundTrip) {
  auto r = sample_record();
  auto text = ranked_record_to_json(r).dump();
  EXPECT_EQ(ranked_record_from_json(nlohmann::json::parse(text)), r);
}

TEST(RankedRecord, ParsesReferenceLine) {
  const char* line =
      R"({"qid": "1414", "e1": "carbamazepine", "e2": "systemic lupus erythematosus", "groundtruth": "1", "metapaths": [{"pathid": 1, "relscore": 1.41565, "probscore": -0.7063895, "relevant": "1", "stops": "Carbamazepine - Conjunctivitis - Dasatinib - Systemic lupus erythematosus rash", "reltypes": "CAUSESCcSE - CAUSESCcSE - CAUSESCcSE", "nodelabels": "Compound - SideEffect - Compound - SideEffect"}]})";
  auto r = ranked_record_from_json(nlohmann::json::parse(line));
  EXPECT_EQ(r.qid, "1414");
  EXPECT_EQ(r.groundtruth, Label::kCausal);
  ASSERT_EQ(r.metapaths.size(), 1u);
  EXPECT_DOUBLE_EQ(r.metapaths[0].probscore, -0.7063895);
  auto sg = subgraph_from_entry(r.metapaths[0]);
  EXPECT_EQ(sg.node_names.size(), 4u);
  EXPECT_EQ(sg.node_types[1], "SideEffect");
  EXPECT_EQ(sg.edge_labels.size(), 3u);
}

TEST(RankedRecord, ValidationFindsProblems) {
  auto j = nlohmann::json(ranked_record_to_json(sample_record()));
  auto bad = j;
  bad["groundtruth"] = 1;
  EXPECT_FALSE(validate_ranked_record_json(bad).empty());
  bad = j;
  bad["metapaths"][1]["pathid"] = 5;
  EXPECT_FALSE(validate_ranked_record_json(bad).empty());
  bad = j;
  bad["metapaths"][0].erase("stops");
  EXPECT_FALSE(validate_ranked_record_json(bad).empty());
  bad = j;
  bad["extra"] = 1;
  EXPECT_FALSE(validate_ranked_record_json(bad).empty());
  EXPECT_THROW(ranked_record_from_json(bad), FormatError);
}

TEST(Instances, JsonRoundTripAndValidation) {
  auto inst = dht_instance();
  auto j = instance_to_json(inst);
  EXPECT_EQ(j["label"], "causal");
  EXPECT_EQ(instance_from_json(nlohmann::json::parse(j.dump())), inst);
  auto same = j;
  same["e2"] = same["e1"];
  EXPECT_THROW(instance_from_json(same), FormatError);
  auto bad = j;
  bad["label"] = "perhaps";
  EXPECT_THROW(instance_from_json(bad), FormatError);
}

// drug 0..2 / disease 0..2; pair 2 has no connecting path.
KnowledgeGraph small_kg(int mediators_for_pair0) {
  std::vector<NodeRecord> nodes = {{"d0", "drug 0", "drug"}, {"x0", "disease 0", "disease"},
                                   {"d1", "drug 1", "drug"}, {"x1", "disease 1", "disease"},
                                   {"d2", "drug 2", "drug"}, {"x2", "disease 2", "disease"}};
  std::vector<EdgeRecord> edges;
  for (int i = 0; i < mediators_for_pair0; ++i) {
    std::string id = "m" + std::to_string(i);
    nodes.push_back({id, "mediator " + std::to_string(i), "mediator"});
    edges.push_back({"d0", "induces", id});
    edges.push_back({id, "leads_to", "x0"});
  }
  nodes.push_back({"g", "gene 1", "gene"});
  edges.push_back({"d1", "binds", "g"});
  edges.push_back({"g", "associates", "x1"});
  return KnowledgeGraph::FromRecords(nodes, edges);
}

std::vector<PairInstance> three_pairs() {
  return {{"q0", "drug 0", "disease 0", "", Label::kCausal},
          {"q1", "drug 1", "disease 1", "", Label::kNonCausal},
          {"q2", "drug 2", "disease 2", "", Label::kNonCausal}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("kgcd_relevancy_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

MockOracleConfig drug_oracle() {
  MockOracleConfig cfg;
  cfg.causal_motifs = {{"drug", "mediator", "disease"}};
  cfg.flip_rate = 0.1;
  cfg.noise_seed = 3;
  return cfg;
}

TEST_F(DatasetTest, SkipsPairsWithoutPaths) {
  auto kg = small_kg(3);
  MockBackend mock(drug_oracle());
  auto pairs = three_pairs();
  auto summary = build_ranked_dataset(pairs, kg, mock, {}, {}, dir_ / "r.jsonl");
  EXPECT_EQ(summary.pairs_processed, 2u);
  EXPECT_EQ(summary.pairs_skipped, 1u);
  EXPECT_EQ(summary.pairs_failed, 0u);
  EXPECT_EQ(summary.backend_calls, 4u);  // 3 + 1 candidates
  EXPECT_EQ(mock.call_count(), 4u);
  auto records = read_ranked_dataset(dir_ / "r.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].qid, "q0");
  EXPECT_EQ(records[1].qid, "q1");
}

TEST_F(DatasetTest, RerunIsByteIdentical) {
  auto kg = small_kg(12);
  auto pairs = three_pairs();
  SreOptions opt;
  opt.seed = 99;
  MockBackend a(drug_oracle()), b(drug_oracle());
  build_ranked_dataset(pairs, kg, a, {}, opt, dir_ / "a.jsonl");
  opt.parallelism = 3;
  build_ranked_dataset(pairs, kg, b, {}, opt, dir_ / "b.jsonl");
  EXPECT_EQ(slurp(dir_ / "a.jsonl"), slurp(dir_ / "b.jsonl"));
  EXPECT_FALSE(slurp(dir_ / "a.jsonl").empty());
}

TEST_F(DatasetTest, CapsCandidatesAtKMax) {
  auto kg = small_kg(12);
  MockBackend mock(drug_oracle());
  std::vector<PairInstance> one = {three_pairs()[0]};
  auto summary = build_ranked_dataset(one, kg, mock, {}, {}, dir_ / "r.jsonl");
  auto records = read_ranked_dataset(dir_ / "r.jsonl");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].metapaths.size(), 10u);
  EXPECT_EQ(summary.backend_calls, 10u);
}

TEST_F(DatasetTest, BackendFailureSkipsPair) {
  auto kg = small_kg(2);
  ScriptedBackend backend({{"gene 1", "", 1.0, true}}, "causal");
  auto pairs = three_pairs();
  auto summary = build_ranked_dataset(pairs, kg, backend, {}, {}, dir_ / "r.jsonl");
  EXPECT_EQ(summary.pairs_processed, 1u);
  EXPECT_EQ(summary.pairs_failed, 1u);
  EXPECT_EQ(summary.pairs_skipped, 1u);
}

TEST_F(DatasetTest, EmittedRecordsSatisfyInvariants) {
  auto kg = small_kg(9);
  MockBackend mock(drug_oracle());
  auto pairs = three_pairs();
  build_ranked_dataset(pairs, kg, mock, {}, {}, dir_ / "r.jsonl");
  std::ifstream in(dir_ / "r.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(validate_ranked_record_json(j).empty()) << line;
    auto r = ranked_record_from_json(j);
    EXPECT_EQ(ranked_record_from_json(nlohmann::json::parse(ranked_record_to_json(r).dump())), r);
    for (std::size_t i = 0; i < r.metapaths.size(); ++i) {
      const auto& m = r.metapaths[i];
      EXPECT_GE(m.relscore, 0.0);
      EXPECT_LE(m.relscore, 2.0);
      EXPECT_LE(m.probscore, 0.0);
      // p > 0 always holds for the mock, so relevance and score agree.
      EXPECT_EQ(m.relevant, m.relscore > 1.0);
      if (i > 0) EXPECT_GE(r.metapaths[i - 1].relscore, m.relscore);
    }
  }
  EXPECT_EQ(lines, 2);
}

TEST(Extract, UnknownVariableYieldsUnresolvedEmptyRecord) {
  auto kg = small_kg(1);
  PairInstance inst{"qz", "drug 0", "nothing here", "", Label::kCausal};
  auto rec = extract_candidates(kg, inst, {});
  EXPECT_FALSE(rec.resolved);
  EXPECT_TRUE(rec.candidates.empty());
  auto back = candidate_record_from_json(nlohmann::json::parse(candidate_record_to_json(rec).dump()));
  EXPECT_FALSE(back.resolved);
  EXPECT_EQ(back.instance, inst);
}

TEST(Extract, PatternModeFiltersByType) {
  auto kg = small_kg(3);
  ExtractOptions opt;
  opt.type_pattern = {"drug", "gene", "disease"};
  auto rec = extract_candidates(kg, three_pairs()[1], opt);
  ASSERT_EQ(rec.candidates.size(), 1u);
  EXPECT_EQ(rec.candidates[0].node_names[1], "gene 1");
  rec = extract_candidates(kg, three_pairs()[0], opt);
  EXPECT_TRUE(rec.candidates.empty());
}

}  // namespace
}  // namespace kgcd
