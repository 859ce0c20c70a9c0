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

// Subgraph relevancy estimation: an LLM judges the pair once per candidate
// subgraph, and the confidence of a correct (or incorrect) answer becomes
// the subgraph's relevance score. The result is the ranked-subgraph dataset.

#ifndef KGCD_RELEVANCY_HPP_
#define KGCD_RELEVANCY_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgcd/kg_store.hpp"
#include "kgcd/llm_gateway.hpp"

namespace kgcd {

struct PairInstance {
  std::string qid;
  std::string e1;
  std::string e2;
  std::string context;
  Label groundtruth = Label::kNonCausal;

  bool operator==(const PairInstance&) const = default;
};

// {"qid", "e1", "e2", "context", "label": "causal" | "non-causal"}
PairInstance instance_from_json(const nlohmann::json& j);
nlohmann::ordered_json instance_to_json(const PairInstance& instance);
std::vector<PairInstance> read_instances(const std::filesystem::path& path);

struct RelevanceScore {
  double s = 1.0;          // in [0, 2]
  double p = 0.0;          // probability of the generated label
  double probscore = 0.0;  // mean token log-prob of the generated label
  std::optional<Label> predicted;
  bool correct = false;
};

// 1 + p when the prediction is correct, 1 - p otherwise.
double relevance_score(bool correct, double p);

struct MetapathEntry {
  int pathid = 0;
  double relscore = 0.0;
  double probscore = 0.0;
  bool relevant = false;
  std::string stops;       // node names joined by " - "
  std::string reltypes;    // edge labels joined by " - "
  std::string nodelabels;  // node types joined by " - "

  bool operator==(const MetapathEntry&) const = default;
};

struct RankedPairRecord {
  std::string qid;
  std::string e1;
  std::string e2;
  Label groundtruth = Label::kNonCausal;
  std::vector<MetapathEntry> metapaths;  // descending relscore

  bool operator==(const RankedPairRecord&) const = default;
};

nlohmann::ordered_json ranked_record_to_json(const RankedPairRecord& record);
RankedPairRecord ranked_record_from_json(const nlohmann::json& j);
std::vector<RankedPairRecord> read_ranked_dataset(
    const std::filesystem::path& path);

// Structural check against the ranked-dataset line format. Returns the list
// of problems; empty means valid.
std::vector<std::string> validate_ranked_record_json(const nlohmann::json& j);

// Rebuilds a subgraph from its joined name/type/label strings. Directions
// are not stored in the dataset and come back as forward.
MetapathSubgraph subgraph_from_entry(const MetapathEntry& entry);

inline constexpr std::string_view kDefaultSreInstruction =
    "Given the following information, classify the relation between the "
    "pair. If there is a cause-effect relationship, state causal; otherwise, "
    "state non-causal.";

inline constexpr std::string_view kDefaultSreTemplate =
    "{instruction}\n"
    "\n"
    "[Pair]:\n"
    "{pair}\n"
    "\n"
    "[Textual context]:\n"
    "{context}\n"
    "\n"
    "[Relation Paths]: {paths}\n"
    "\n"
    "[Relation]:";

// Substitutes {instruction}, {pair}, {context} and {paths}; {paths} is the
// hyphen rendering. Throws TemplateError when a placeholder is missing.
std::string build_sre_prompt(const PairInstance& instance,
                             const MetapathSubgraph& subgraph,
                             std::string_view tmpl = kDefaultSreTemplate,
                             std::string_view instruction =
                                 kDefaultSreInstruction);

struct SreOptions {
  std::string template_text = std::string(kDefaultSreTemplate);
  std::string instruction = std::string(kDefaultSreInstruction);
  int max_tokens = 8;
  std::size_t k_max = 10;
  std::uint64_t seed = 0;  // candidate down-sampling above k_max
  int parallelism = 1;
};

RelevanceScore score_subgraph(const PairInstance& instance,
                              const MetapathSubgraph& subgraph,
                              Backend& backend,
                              const SreOptions& options = {});

// Scores every candidate and sorts by descending score, ties by input order.
RankedPairRecord rank_pair(const PairInstance& instance,
                           std::span<const MetapathSubgraph> subgraphs,
                           Backend& backend, const SreOptions& options = {});

// Candidate subgraphs of one pair, as produced by extraction.
struct CandidateRecord {
  PairInstance instance;
  bool resolved = true;  // false when a variable is not in the KG
  std::vector<MetapathSubgraph> candidates;
};

nlohmann::ordered_json candidate_record_to_json(const CandidateRecord& record);
CandidateRecord candidate_record_from_json(const nlohmann::json& j);
std::vector<CandidateRecord> read_candidates(const std::filesystem::path& path);

struct ExtractOptions {
  int max_hops = 2;
  std::size_t candidate_limit = 50;
  std::uint64_t seed = 0;
  // When set, pattern matching replaces shortest-path enumeration.
  std::vector<std::string> type_pattern;
  std::vector<std::string> relation_pattern;
};

CandidateRecord extract_candidates(const KnowledgeGraph& kg,
                                   const PairInstance& instance,
                                   const ExtractOptions& options);

struct DatasetSummary {
  std::size_t pairs_processed = 0;
  std::size_t pairs_skipped = 0;  // no candidate subgraph
  std::size_t pairs_failed = 0;   // backend failure
  std::size_t backend_calls = 0;
};

// Writes one ranked record per line, in input order, for every pair with at
// least one candidate. Candidates above k_max are down-sampled with the
// seed. A backend failure skips (and counts) the pair.
DatasetSummary write_ranked_dataset(std::span<const CandidateRecord> records,
                                    Backend& backend,
                                    const SreOptions& options,
                                    std::ostream& out);

DatasetSummary build_ranked_dataset(std::span<const PairInstance> instances,
                                    const KnowledgeGraph& kg, Backend& backend,
                                    const ExtractOptions& extract,
                                    const SreOptions& options,
                                    const std::filesystem::path& out_path);

}  // namespace kgcd

#endif  // KGCD_RELEVANCY_HPP_
