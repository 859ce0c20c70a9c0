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

#include "kgcd/discovery.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>

#include "kgcd/error.hpp"
#include "kgcd/jsonl.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"

namespace kgcd {

std::vector<MetapathSubgraph> select_top_k(std::span<const ScoredSubgraph> scored,
                                           std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const auto& s : scored) scores.push_back(s.score);
  std::vector<MetapathSubgraph> out;
  for (std::size_t i : descending_order(scores)) {
    if (out.size() == k) break;
    out.push_back(scored[i].subgraph);
  }
  return out;
}

std::string build_discovery_prompt(const PairInstance& instance,
                                   std::span<const MetapathSubgraph> subgraphs,
                                   const VerbalizationStyle& style,
                                   std::string_view tmpl,
                                   std::string_view instruction) {
  for (std::string_view key : {"paths", "a", "b"}) {
    if (!has_placeholder(tmpl, key)) {
      throw TemplateError("discovery template lacks {" + std::string(key) + "}");
    }
  }
  std::string paths;
  for (std::size_t i = 0; i < subgraphs.size(); ++i) {
    if (i > 0) paths += '\n';
    paths += verbalize(subgraphs[i], style);
  }
  const std::pair<std::string_view, std::string> values[] = {
      {"instruction", std::string(instruction)},
      {"context", instance.context},
      {"paths", paths},
      {"a", instance.e1},
      {"b", instance.e2},
  };
  return render_template(tmpl, values);
}

nlohmann::ordered_json prediction_to_json(const CausalPrediction& p) {
  nlohmann::ordered_json j;
  j["qid"] = p.qid;
  j["predicted"] = p.predicted ? std::string(to_string(*p.predicted)) : "unparseable";
  j["p"] = p.p;
  j["subgraphs_used"] = p.subgraphs_used;
  j["backend_id"] = p.backend_id;
  j["e1"] = p.e1;
  j["e2"] = p.e2;
  return j;
}

CausalPrediction prediction_from_json(const nlohmann::json& j) {
  CausalPrediction p;
  try {
    p.qid = j.at("qid").is_string() ? j.at("qid").get<std::string>()
                                    : j.at("qid").dump();
    const auto predicted = j.at("predicted").get<std::string>();
    if (predicted != "unparseable") p.predicted = parse_label(predicted);
    p.p = j.at("p").get<double>();
    if (!(p.p >= 0.0 && p.p <= 1.0)) throw FormatError("p outside [0, 1]");
    p.subgraphs_used = j.value("subgraphs_used", std::vector<std::string>{});
    p.backend_id = j.value("backend_id", std::string());
    p.e1 = j.value("e1", std::string());
    p.e2 = j.value("e2", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad prediction: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad prediction: ") + e.what());
  }
  return p;
}

std::vector<CausalPrediction> read_predictions(const std::filesystem::path& path) {
  return read_jsonl<CausalPrediction>(
      path, [](const nlohmann::json& j) { return prediction_from_json(j); });
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random") return BaselineKind::kRandom;
  if (name == "similarity") return BaselineKind::kSimilarity;
  if (name == "permutation") return BaselineKind::kPermutation;
  throw InvalidArgument("unknown baseline '" + std::string(name) + "'");
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom:
      return "random";
    case BaselineKind::kSimilarity:
      return "similarity";
    case BaselineKind::kPermutation:
      return "permutation";
  }
  return "random";
}

std::vector<int> parse_permutation(std::string_view text, int k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  static const std::regex kBracketed(R"(\[(\d+)\])");
  std::vector<bool> seen(static_cast<std::size_t>(k) + 1, false);
  std::vector<int> order;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kBracketed);
       it != std::sregex_iterator(); ++it) {
    const std::string digits = (*it)[1].str();
    if (digits.size() > 9) continue;
    const int v = std::stoi(digits);
    if (v < 1 || v > k || seen[v]) continue;
    seen[v] = true;
    order.push_back(v);
  }
  for (int v = 1; v <= k; ++v) {
    if (!seen[v]) order.push_back(v);
  }
  return order;
}

std::string build_permutation_prompt(std::string_view a, std::string_view b,
                                     std::span<const MetapathSubgraph> subgraphs) {
  const auto n = std::to_string(subgraphs.size());
  const auto hyphen = VerbalizationStyle::Of(StyleVariant::kHyphen);
  std::string out =
      "You are an assistant that orders knowledge graph paths.\n\n"
      "Below are " + n + " paths, each marked with an identifier in square "
      "brackets. Rank the paths by how much each one helps decide whether " +
      std::string(a) + " causes " + std::string(b) + ".\n\n";
  for (std::size_t i = 0; i < subgraphs.size(); ++i) {
    out += "[" + std::to_string(i + 1) + "] " + verbalize(subgraphs[i], hyphen) + "\n";
  }
  out += "\nRank the " + n +
         " paths above from most to least useful. Reply with identifiers "
         "only, separated by >.";
  return out;
}

BaselineRanking baseline_rank(BaselineKind kind, std::string_view a,
                              std::string_view b,
                              std::span<const MetapathSubgraph> subgraphs,
                              const BaselineDeps& deps) {
  if (subgraphs.empty()) throw EmptyCandidates("nothing to rank");
  BaselineRanking out;
  switch (kind) {
    case BaselineKind::kRandom: {
      const std::string key = std::string(a) + '\x1f' + std::string(b);
      out.order = shuffled_indices(subgraphs.size(), derive_seed(deps.seed, key));
      break;
    }
    case BaselineKind::kSimilarity: {
      if (deps.lm == nullptr) {
        throw InvalidArgument("similarity baseline needs an n-gram model");
      }
      const RankerModel model = make_similarity_ranker(*deps.lm);
      std::vector<double> scores;
      for (const auto& sg : subgraphs) scores.push_back(model.score(a, b, sg));
      out.order = descending_order(scores);
      break;
    }
    case BaselineKind::kPermutation: {
      if (deps.backend == nullptr) {
        throw InvalidArgument("permutation baseline needs a backend");
      }
      CompletionRequest request;
      request.prompt = build_permutation_prompt(a, b, subgraphs);
      request.max_tokens = static_cast<int>(8 * subgraphs.size() + 8);
      request.want_logprobs = false;
      const Completion reply = deps.backend->complete(request);
      const int k = static_cast<int>(subgraphs.size());
      static const std::regex kAnyIndex(R"(\[(\d{1,9})\])");
      bool usable = false;
      for (auto it = std::sregex_iterator(reply.text.begin(), reply.text.end(),
                                          kAnyIndex);
           it != std::sregex_iterator(); ++it) {
        const int v = std::stoi((*it)[1].str());
        if (v >= 1 && v <= k) usable = true;
      }
      out.degraded = !usable;
      for (int v : parse_permutation(reply.text, k)) {
        out.order.push_back(static_cast<std::size_t>(v - 1));
      }
      break;
    }
  }
  return out;
}

SelectionMode parse_selection_mode(std::string_view name) {
  if (name == "ranker") return SelectionMode::kRanker;
  if (name == "no-subgraph") return SelectionMode::kNoSubgraph;
  if (name == "permutation") return SelectionMode::kPermutation;
  throw InvalidArgument("unknown selection mode '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kRanker:
      return "ranker";
    case SelectionMode::kNoSubgraph:
      return "no-subgraph";
    case SelectionMode::kPermutation:
      return "permutation";
  }
  return "ranker";
}

namespace {

std::vector<MetapathSubgraph> choose_subgraphs(const PairInstance& instance,
                                               const KnowledgeGraph& kg,
                                               const RankerModel* ranker,
                                               Backend& backend,
                                               const DiscoveryOptions& options,
                                               bool& degraded) {
  if (options.mode == SelectionMode::kNoSubgraph) return {};
  CandidateRecord record = extract_candidates(kg, instance, options.extract);
  if (record.candidates.empty()) return {};
  if (options.mode == SelectionMode::kPermutation) {
    BaselineDeps deps;
    deps.backend = &backend;
    BaselineRanking ranking = baseline_rank(BaselineKind::kPermutation, instance.e1,
                                            instance.e2, record.candidates, deps);
    degraded = ranking.degraded;
    std::vector<MetapathSubgraph> out;
    for (std::size_t i : ranking.order) {
      if (out.size() == options.k) break;
      out.push_back(record.candidates[i]);
    }
    return out;
  }
  if (ranker == nullptr) throw InvalidArgument("ranker mode needs a ranker model");
  auto scored = rank_subgraphs(*ranker, instance.e1, instance.e2, record.candidates);
  return select_top_k(scored, options.k);
}

}  // namespace

PairOutcome classify_pair(const PairInstance& instance, const KnowledgeGraph& kg,
                          const RankerModel* ranker, Backend& backend,
                          const DiscoveryOptions& options) {
  if (options.k == 0) throw InvalidArgument("k must be >= 1");
  PairOutcome outcome;
  CausalPrediction& pred = outcome.prediction;
  pred.qid = instance.qid;
  pred.e1 = instance.e1;
  pred.e2 = instance.e2;
  pred.backend_id = backend.id();
  const std::string tag = "qid " + instance.qid + ": ";
  try {
    auto chosen = choose_subgraphs(instance, kg, ranker, backend, options,
                                   outcome.degraded);
    for (const auto& sg : chosen) {
      pred.subgraphs_used.push_back(verbalize(sg, options.style));
    }
    CompletionRequest request;
    request.prompt = build_discovery_prompt(instance, chosen, options.style,
                                            options.template_text,
                                            options.instruction);
    request.max_tokens = options.max_tokens;
    const Completion reply = backend.complete(request);
    try {
      const LabelProbability lp = label_probability(reply);
      pred.predicted = lp.label;
      pred.p = lp.p;
    } catch (const UnparseableLabel&) {
      pred.predicted.reset();
      pred.p = 0.0;
    }
  } catch (const BackendUnavailable& e) {
    throw BackendUnavailable(tag + e.what());
  } catch (const BackendRejected& e) {
    throw BackendRejected(e.status(), tag + e.what());
  } catch (const CapabilityMissing& e) {
    throw CapabilityMissing(tag + e.what());
  }
  return outcome;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ClassificationMetrics metrics_from_counts(std::size_t tp, std::size_t fp,
                                          std::size_t fn, std::size_t tn) {
  ClassificationMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  if (tp + fp == 0) {
    m.precision = 100.0;
    m.precision_undefined = true;
  } else {
    m.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall = 100.0;
    m.recall_undefined = true;
  } else {
    m.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

ClassificationMetrics evaluate_classification(
    std::span<const CausalPrediction> predictions,
    std::span<const PairInstance> golds) {
  std::map<std::string, const CausalPrediction*> by_qid;
  for (const auto& p : predictions) {
    if (!by_qid.emplace(p.qid, &p).second) {
      throw InvalidArgument("duplicate prediction for qid " + p.qid);
    }
  }
  if (by_qid.size() != golds.size()) {
    throw InvalidArgument("qid mismatch: " + std::to_string(predictions.size()) +
                          " predictions for " + std::to_string(golds.size()) +
                          " gold pairs");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0, unparseable = 0;
  for (const auto& gold : golds) {
    auto it = by_qid.find(gold.qid);
    if (it == by_qid.end()) {
      throw InvalidArgument("qid mismatch: no prediction for " + gold.qid);
    }
    const auto& predicted = it->second->predicted;
    const bool gold_causal = gold.groundtruth == Label::kCausal;
    if (!predicted) {
      ++unparseable;
      ++(gold_causal ? fn : fp);
      continue;
    }
    const bool pred_causal = *predicted == Label::kCausal;
    if (pred_causal && gold_causal) ++tp;
    else if (pred_causal) ++fp;
    else if (gold_causal) ++fn;
    else ++tn;
  }
  ClassificationMetrics m = metrics_from_counts(tp, fp, fn, tn);
  m.unparseable = unparseable;
  return m;
}

nlohmann::ordered_json ClassificationMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["tp"] = tp;
  j["fp"] = fp;
  j["fn"] = fn;
  j["tn"] = tn;
  j["unparseable"] = unparseable;
  j["precision_undefined"] = precision_undefined;
  j["recall_undefined"] = recall_undefined;
  return j;
}

namespace {

void check_square_binary(const AdjacencyMatrix& m, const char* what) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != m.size()) {
      throw InvalidArgument(std::string(what) + " is not square");
    }
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[i][j] != 0 && m[i][j] != 1) {
        throw InvalidArgument(std::string(what) + " has a non-binary entry");
      }
    }
    if (m[i][i] != 0) throw InvalidArgument(std::string(what) + " has a self-loop");
  }
}

}  // namespace

GoldGraph read_gold_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  GoldGraph g;
  try {
    const auto j = nlohmann::json::parse(in);
    g.variables = j.at("variables").get<std::vector<std::string>>();
    g.adjacency = j.at("adjacency").get<AdjacencyMatrix>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (g.adjacency.size() != g.variables.size()) {
    throw FormatError(path.string() + ": adjacency size differs from variable count");
  }
  check_square_binary(g.adjacency, "gold adjacency");
  return g;
}

AdjacencyMatrix aggregate_graph(std::span<const CausalPrediction> predictions,
                                std::span<const std::string> variables) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (!index.emplace(variables[i], i).second) {
      throw InvalidArgument("duplicate variable '" + variables[i] + "'");
    }
  }
  AdjacencyMatrix adj(variables.size(), std::vector<int>(variables.size(), 0));
  for (const auto& p : predictions) {
    auto a = index.find(p.e1);
    auto b = index.find(p.e2);
    if (a == index.end() || b == index.end() || a->second == b->second) continue;
    if (p.predicted == Label::kCausal) adj[a->second][b->second] = 1;
  }
  return adj;
}

GraphDistance hamming(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
  if (a.size() != b.size()) throw InvalidArgument("adjacency dimension mismatch");
  check_square_binary(a, "adjacency");
  check_square_binary(b, "adjacency");
  GraphDistance d;
  d.n = a.size();
  for (std::size_t i = 0; i < d.n; ++i) {
    for (std::size_t j = 0; j < d.n; ++j) d.hd += a[i][j] != b[i][j] ? 1 : 0;
  }
  d.nhd = d.n == 0 ? 0.0
                   : static_cast<double>(d.hd) / static_cast<double>(d.n * d.n);
  return d;
}

nlohmann::ordered_json EvaluationReport::to_json() const {
  nlohmann::ordered_json j;
  j["classification"] = classification.to_json();
  j["ranking"] = ranking ? ranking->to_json() : nlohmann::ordered_json(nullptr);
  if (graph) {
    j["graph"] = {{"hd", graph->hd}, {"nhd", graph->nhd}, {"n", graph->n},
                  {"orientation", "all ordered pairs"}};
  } else {
    j["graph"] = nullptr;
  }
  return j;
}

}  // namespace kgcd
