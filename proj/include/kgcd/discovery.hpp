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

// Zero-shot causal classification of variable pairs with ranked subgraphs in
// the prompt, the ranking baselines, and the evaluation metrics.

#ifndef KGCD_DISCOVERY_HPP_
#define KGCD_DISCOVERY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgcd/kg_store.hpp"
#include "kgcd/llm_gateway.hpp"
#include "kgcd/ngram_lm.hpp"
#include "kgcd/ranker.hpp"
#include "kgcd/relevancy.hpp"
#include "kgcd/verbalizer.hpp"

namespace kgcd {

// The k highest-scoring subgraphs, stable on ties.
std::vector<MetapathSubgraph> select_top_k(std::span<const ScoredSubgraph> scored,
                                           std::size_t k);

inline constexpr std::string_view kDefaultDiscoveryInstruction =
    "Classify the relation between the two variables as causal or "
    "non-causal, using the context and the knowledge graph paths below.";

inline constexpr std::string_view kDefaultDiscoveryTemplate =
    "{instruction}\n"
    "\n"
    "[Textual context]:\n"
    "{context}\n"
    "\n"
    "[Relation Paths]:\n"
    "{paths}\n"
    "\n"
    "The relation between {a} and {b} is";

// Required placeholders: {paths}, {a}, {b}. {instruction} and {context} are
// optional. One verbalized subgraph per line, in the given order.
std::string build_discovery_prompt(
    const PairInstance& instance, std::span<const MetapathSubgraph> subgraphs,
    const VerbalizationStyle& style,
    std::string_view tmpl = kDefaultDiscoveryTemplate,
    std::string_view instruction = kDefaultDiscoveryInstruction);

struct CausalPrediction {
  std::string qid;
  std::string e1;
  std::string e2;
  std::optional<Label> predicted;  // nullopt when the reply had no label
  double p = 0.0;
  std::vector<std::string> subgraphs_used;
  std::string backend_id;

  bool operator==(const CausalPrediction&) const = default;
};

nlohmann::ordered_json prediction_to_json(const CausalPrediction& prediction);
CausalPrediction prediction_from_json(const nlohmann::json& j);
std::vector<CausalPrediction> read_predictions(const std::filesystem::path& path);

enum class BaselineKind { kRandom, kSimilarity, kPermutation };

BaselineKind parse_baseline_kind(std::string_view name);
std::string_view to_string(BaselineKind kind);

// 1-based ordering from bracketed integers: first occurrence wins,
// out-of-range values are dropped, missing indices follow in ascending order.
std::vector<int> parse_permutation(std::string_view text, int k);

std::string build_permutation_prompt(std::string_view a, std::string_view b,
                                     std::span<const MetapathSubgraph> subgraphs);

struct BaselineDeps {
  const NgramLm* lm = nullptr;   // similarity
  Backend* backend = nullptr;    // permutation
  std::uint64_t seed = 0;        // random
};

struct BaselineRanking {
  std::vector<std::size_t> order;  // 0-based indices into the input
  bool degraded = false;           // permutation reply held no usable index
};

BaselineRanking baseline_rank(BaselineKind kind, std::string_view a,
                              std::string_view b,
                              std::span<const MetapathSubgraph> subgraphs,
                              const BaselineDeps& deps);

enum class SelectionMode { kRanker, kNoSubgraph, kPermutation };

SelectionMode parse_selection_mode(std::string_view name);
std::string_view to_string(SelectionMode mode);

struct DiscoveryOptions {
  std::size_t k = 1;
  VerbalizationStyle style = VerbalizationStyle::Of(StyleVariant::kPlainArrows);
  std::string template_text = std::string(kDefaultDiscoveryTemplate);
  std::string instruction = std::string(kDefaultDiscoveryInstruction);
  int max_tokens = 8;
  SelectionMode mode = SelectionMode::kRanker;
  ExtractOptions extract;
};

struct PairOutcome {
  CausalPrediction prediction;
  bool degraded = false;  // permutation fallback was used
};

// Extracts candidates, orders them (ranker or permutation), keeps the top k
// and asks the backend. `ranker` may be null only in kNoSubgraph and
// kPermutation modes. Backend failures are rethrown with the qid prefixed.
PairOutcome classify_pair(const PairInstance& instance, const KnowledgeGraph& kg,
                          const RankerModel* ranker, Backend& backend,
                          const DiscoveryOptions& options);

struct ClassificationMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t unparseable = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f1 = 0.0;         // percent
  bool precision_undefined = false;  // no positive prediction
  bool recall_undefined = false;     // no positive gold label

  nlohmann::ordered_json to_json() const;
};

// Harmonic mean, 0 when both inputs are 0. Works on any common scale.
double f1_score(double precision, double recall);

ClassificationMetrics metrics_from_counts(std::size_t tp, std::size_t fp,
                                          std::size_t fn, std::size_t tn);

// Matches predictions to gold instances by qid. Every gold qid needs exactly
// one prediction and vice versa.
ClassificationMetrics evaluate_classification(
    std::span<const CausalPrediction> predictions,
    std::span<const PairInstance> golds);

using AdjacencyMatrix = std::vector<std::vector<int>>;

struct GoldGraph {
  std::vector<std::string> variables;
  AdjacencyMatrix adjacency;
};

GoldGraph read_gold_graph(const std::filesystem::path& path);

// adj[i][j] = 1 iff the prediction for (v_i, v_j) is causal. Predictions
// naming other variables are ignored; the diagonal stays 0.
AdjacencyMatrix aggregate_graph(std::span<const CausalPrediction> predictions,
                                std::span<const std::string> variables);

struct GraphDistance {
  std::size_t hd = 0;
  double nhd = 0.0;  // hd / n^2
  std::size_t n = 0;
};

GraphDistance hamming(const AdjacencyMatrix& a, const AdjacencyMatrix& b);

struct EvaluationReport {
  ClassificationMetrics classification;
  std::optional<RankingMetrics> ranking;
  std::optional<GraphDistance> graph;

  nlohmann::ordered_json to_json() const;
};

}  // namespace kgcd

#endif  // KGCD_DISCOVERY_HPP_
