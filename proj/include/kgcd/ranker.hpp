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

// Learning-to-rank subgraph rankers. A ranker scores (pair, subgraph)
// inputs, encoded as "CLS a b SEP typed path" and featurized with the n-gram
// language model. Four kinds exist: a feedforward scorer trained with a
// pointwise/pairwise/listwise loss, boosted regression trees, embedding
// cosine similarity, and seeded random scores.

#ifndef KGCD_RANKER_HPP_
#define KGCD_RANKER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgcd/gbdt.hpp"
#include "kgcd/kg_store.hpp"
#include "kgcd/losses.hpp"
#include "kgcd/ngram_lm.hpp"
#include "kgcd/relevancy.hpp"

namespace kgcd {

enum class RankerKind { kNeural, kGbdt, kSimilarity, kRandom };

RankerKind parse_ranker_kind(std::string_view name);
std::string_view to_string(RankerKind kind);

struct FeatureConfig {
  bool include_types = true;
  std::size_t hash_buckets = kDefaultHashBuckets;

  bool operator==(const FeatureConfig&) const = default;
};

// s = w2 . tanh(W1^T z + b1) + b2, where z is the standardized dense
// feature vector.
struct NeuralScorer {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // input_dim x hidden, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  std::vector<double> feature_mean;   // input_dim
  std::vector<double> feature_scale;  // input_dim, multiplies (x - mean)

  static NeuralScorer Init(std::size_t input_dim, std::size_t hidden,
                           std::uint64_t seed);

  double score(std::span<const double> features) const;

  // Loss of one query's item list and its gradient with respect to every
  // parameter, flattened in parameters() order. `items` holds k feature
  // rows; `targets` feeds rmse/listnet and `ranks` feeds ranknet.
  double list_loss(std::span<const std::vector<double>> items, LossKind loss,
                   std::span<const double> targets, std::span<const int> ranks,
                   std::vector<double>* gradient) const;

  // w1, b1, w2, b2 concatenated.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  std::size_t parameter_count() const { return input_dim * hidden + 2 * hidden + 1; }

  bool operator==(const NeuralScorer&) const = default;
};

struct TrainConfig {
  int epochs = 40;
  double learning_rate = 0.003;  // Adam step size
  std::size_t batch = 8;        // queries per update
  std::uint64_t seed = 0;
  std::size_t hidden = 64;
  int patience = 0;  // stop after this many epochs without improvement; 0 = off
  GbdtConfig gbdt;
};

class RankerModel {
 public:
  RankerKind kind = RankerKind::kRandom;
  LossKind loss_kind = LossKind::kRmse;
  FeatureConfig features;
  std::uint64_t seed = 0;
  std::optional<NgramLm> lm;
  std::optional<NeuralScorer> neural;
  std::optional<GbdtModel> gbdt;
  std::vector<double> epoch_losses;
  std::size_t skipped_records = 0;

  // f((a, b), m). Random scores depend on (seed, pair, subgraph) only.
  double score(std::string_view a, std::string_view b,
               const MetapathSubgraph& subgraph) const;

  nlohmann::ordered_json to_json() const;
  static RankerModel FromJson(const nlohmann::json& j);

  bool operator==(const RankerModel&) const = default;
};

// Token sequences "CLS a b SEP ..." for every (record, metapath); the
// n-gram model's training corpus.
std::vector<TokenSequence> build_ranker_corpus(
    std::span<const RankedPairRecord> dataset, bool include_types);

// Feature rows, targets (relscore) and ranks (1-based dataset order) of one
// record.
struct RankingQuery {
  std::vector<FeatureVector> items;
  std::vector<double> targets;
  std::vector<int> ranks;
  std::vector<bool> relevant;
};

RankingQuery make_query(const RankedPairRecord& record, const NgramLm& lm,
                        const FeatureConfig& features);

RankerModel train_neural_ranker(std::span<const RankedPairRecord> dataset,
                                const NgramLm& lm, LossKind loss,
                                const TrainConfig& config,
                                const FeatureConfig& features = {});

RankerModel train_gbdt_ranker(std::span<const RankedPairRecord> dataset,
                              const NgramLm& lm, const TrainConfig& config,
                              const FeatureConfig& features = {});

RankerModel make_similarity_ranker(NgramLm lm);
RankerModel make_random_ranker(std::uint64_t seed);

struct ScoredSubgraph {
  MetapathSubgraph subgraph;
  double score = 0.0;
};

// Stable descending sort by model score.
std::vector<ScoredSubgraph> rank_subgraphs(
    const RankerModel& model, std::string_view a, std::string_view b,
    std::span<const MetapathSubgraph> subgraphs);

// Indices into `scores` sorted by descending score, ties by index.
std::vector<std::size_t> descending_order(std::span<const double> scores);

struct RankingMetrics {
  std::size_t queries = 0;
  std::map<std::size_t, double> ndcg;    // k -> mean NDCG@k
  std::map<std::size_t, double> recall;  // k -> mean Recall@k

  nlohmann::ordered_json to_json() const;
};

// Ranks each record's metapaths with the model and scores the order against
// the estimated relevance: graded relscore gains for NDCG, `relevant` flags
// for recall.
RankingMetrics evaluate_ranking(const RankerModel& model,
                                std::span<const RankedPairRecord> dataset,
                                std::span<const std::size_t> ks);

}  // namespace kgcd

#endif  // KGCD_RANKER_HPP_
