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

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "kgcd/error.hpp"
#include "kgcd/jsonl.hpp"
#include "kgcd/parallel.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"
#include "kgcd/verbalizer.hpp"

namespace kgcd {

namespace {

std::string bool_flag(bool b) { return b ? "1" : "0"; }

}  // namespace

PairInstance instance_from_json(const nlohmann::json& j) {
  PairInstance p;
  try {
    p.qid = j.at("qid").is_string() ? j.at("qid").get<std::string>()
                                    : j.at("qid").dump();
    p.e1 = j.at("e1").get<std::string>();
    p.e2 = j.at("e2").get<std::string>();
    p.context = j.value("context", std::string());
    const auto& label = j.contains("label") ? j.at("label") : j.at("groundtruth");
    p.groundtruth = parse_label(label.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad pair instance: ") + e.what());
  }
  if (ascii_lower(p.e1) == ascii_lower(p.e2)) {
    throw FormatError("pair instance '" + p.qid + "' has identical variables");
  }
  return p;
}

nlohmann::ordered_json instance_to_json(const PairInstance& p) {
  nlohmann::ordered_json j;
  j["qid"] = p.qid;
  j["e1"] = p.e1;
  j["e2"] = p.e2;
  j["context"] = p.context;
  j["label"] = std::string(to_string(p.groundtruth));
  return j;
}

std::vector<PairInstance> read_instances(const std::filesystem::path& path) {
  return read_jsonl<PairInstance>(
      path, [](const nlohmann::json& j) { return instance_from_json(j); });
}

double relevance_score(bool correct, double p) {
  return correct ? 1.0 + p : 1.0 - p;
}

nlohmann::ordered_json ranked_record_to_json(const RankedPairRecord& r) {
  nlohmann::ordered_json j;
  j["qid"] = r.qid;
  j["e1"] = r.e1;
  j["e2"] = r.e2;
  j["groundtruth"] = bool_flag(r.groundtruth == Label::kCausal);
  auto paths = nlohmann::ordered_json::array();
  for (const auto& m : r.metapaths) {
    nlohmann::ordered_json e;
    e["pathid"] = m.pathid;
    e["relscore"] = m.relscore;
    e["probscore"] = m.probscore;
    e["relevant"] = bool_flag(m.relevant);
    e["stops"] = m.stops;
    e["reltypes"] = m.reltypes;
    e["nodelabels"] = m.nodelabels;
    paths.push_back(std::move(e));
  }
  j["metapaths"] = std::move(paths);
  return j;
}

std::vector<std::string> validate_ranked_record_json(const nlohmann::json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"record is not a JSON object"};
  const std::set<std::string> top_keys{"qid", "e1", "e2", "groundtruth",
                                       "metapaths"};
  for (const auto& [key, _] : j.items()) {
    if (!top_keys.contains(key)) problems.push_back("unexpected key '" + key + "'");
  }
  for (const char* key : {"qid", "e1", "e2"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      problems.push_back(std::string("'") + key + "' must be a string");
    }
  }
  auto is_flag = [](const nlohmann::json& v) {
    return v.is_string() && (v == "1" || v == "0");
  };
  if (!j.contains("groundtruth") || !is_flag(j["groundtruth"])) {
    problems.push_back("'groundtruth' must be \"1\" or \"0\"");
  }
  if (!j.contains("metapaths") || !j["metapaths"].is_array() ||
      j["metapaths"].empty()) {
    problems.push_back("'metapaths' must be a non-empty array");
    return problems;
  }
  const std::set<std::string> path_keys{"pathid", "relscore", "probscore",
                                        "relevant", "stops", "reltypes",
                                        "nodelabels"};
  int expected_id = 1;
  double previous = 0.0;
  for (const auto& m : j["metapaths"]) {
    const std::string where = "metapath " + std::to_string(expected_id);
    if (!m.is_object()) {
      problems.push_back(where + " is not an object");
      ++expected_id;
      continue;
    }
    for (const auto& [key, _] : m.items()) {
      if (!path_keys.contains(key)) {
        problems.push_back(where + ": unexpected key '" + key + "'");
      }
    }
    if (!m.contains("pathid") || !m["pathid"].is_number_integer() ||
        m["pathid"].get<int>() != expected_id) {
      problems.push_back(where + ": 'pathid' must be " +
                         std::to_string(expected_id));
    }
    for (const char* key : {"relscore", "probscore"}) {
      if (!m.contains(key) || !m[key].is_number()) {
        problems.push_back(where + ": '" + key + "' must be a number");
      }
    }
    if (m.contains("relscore") && m["relscore"].is_number()) {
      double rel = m["relscore"].get<double>();
      if (expected_id > 1 && rel > previous) {
        problems.push_back(where + ": relscore not in descending order");
      }
      previous = rel;
    }
    if (!m.contains("relevant") || !is_flag(m["relevant"])) {
      problems.push_back(where + ": 'relevant' must be \"1\" or \"0\"");
    }
    for (const char* key : {"stops", "reltypes", "nodelabels"}) {
      if (!m.contains(key) || !m[key].is_string()) {
        problems.push_back(where + ": '" + key + "' must be a string");
      }
    }
    ++expected_id;
  }
  return problems;
}

RankedPairRecord ranked_record_from_json(const nlohmann::json& j) {
  auto problems = validate_ranked_record_json(j);
  if (!problems.empty()) throw FormatError(problems.front());
  RankedPairRecord r;
  r.qid = j["qid"].get<std::string>();
  r.e1 = j["e1"].get<std::string>();
  r.e2 = j["e2"].get<std::string>();
  r.groundtruth = j["groundtruth"] == "1" ? Label::kCausal : Label::kNonCausal;
  for (const auto& m : j["metapaths"]) {
    MetapathEntry e;
    e.pathid = m["pathid"].get<int>();
    e.relscore = m["relscore"].get<double>();
    e.probscore = m["probscore"].get<double>();
    e.relevant = m["relevant"] == "1";
    e.stops = m["stops"].get<std::string>();
    e.reltypes = m["reltypes"].get<std::string>();
    e.nodelabels = m["nodelabels"].get<std::string>();
    r.metapaths.push_back(std::move(e));
  }
  return r;
}

std::vector<RankedPairRecord> read_ranked_dataset(
    const std::filesystem::path& path) {
  return read_jsonl<RankedPairRecord>(path, [](const nlohmann::json& j) {
    return ranked_record_from_json(j);
  });
}

MetapathSubgraph subgraph_from_entry(const MetapathEntry& entry) {
  MetapathSubgraph sg;
  sg.node_names = split(entry.stops, " - ");
  sg.node_types = split(entry.nodelabels, " - ");
  sg.edge_labels = split(entry.reltypes, " - ");
  if (sg.node_types.size() != sg.node_names.size()) {
    sg.node_types.assign(sg.node_names.size(), std::string());
  }
  if (sg.edge_labels.size() + 1 != sg.node_names.size()) {
    sg.edge_labels.assign(sg.node_names.size() - 1, std::string());
  }
  sg.node_ids = sg.node_names;
  sg.edge_directions.assign(sg.edge_labels.size(), EdgeDirection::kForward);
  return sg;
}

std::string build_sre_prompt(const PairInstance& instance,
                             const MetapathSubgraph& subgraph,
                             std::string_view tmpl,
                             std::string_view instruction) {
  for (const char* key : {"instruction", "pair", "context", "paths"}) {
    if (!has_placeholder(tmpl, key)) {
      throw TemplateError(std::string("template lacks {") + key + "}");
    }
  }
  const std::pair<std::string_view, std::string> values[] = {
      {"instruction", std::string(instruction)},
      {"pair", instance.e1 + " and " + instance.e2},
      {"context", instance.context},
      {"paths", verbalize(subgraph, VerbalizationStyle::Of(StyleVariant::kHyphen))},
  };
  return render_template(tmpl, values);
}

RelevanceScore score_subgraph(const PairInstance& instance,
                              const MetapathSubgraph& subgraph,
                              Backend& backend, const SreOptions& options) {
  CompletionRequest request;
  request.prompt = build_sre_prompt(instance, subgraph, options.template_text,
                                    options.instruction);
  request.max_tokens = options.max_tokens;
  request.want_logprobs = true;
  Completion completion = backend.complete(request);

  RelevanceScore score;
  try {
    LabelProbability lp = label_probability(completion);
    score.predicted = lp.label;
    score.p = lp.p;
    score.probscore = lp.mean_logprob;
    score.correct = lp.label == instance.groundtruth;
  } catch (const UnparseableLabel&) {
    score.p = 0.0;
    score.correct = false;
    double sum = 0.0;
    for (const auto& t : completion.tokens) sum += t.logprob;
    score.probscore =
        completion.tokens.empty() ? 0.0 : sum / completion.tokens.size();
  }
  score.s = relevance_score(score.correct, score.p);
  return score;
}

RankedPairRecord rank_pair(const PairInstance& instance,
                           std::span<const MetapathSubgraph> subgraphs,
                           Backend& backend, const SreOptions& options) {
  if (subgraphs.empty()) {
    throw EmptyCandidates("pair '" + instance.qid + "' has no candidates");
  }
  if (subgraphs.size() > options.k_max) {
    throw InvalidArgument("pair '" + instance.qid + "' has more than k_max (" +
                          std::to_string(options.k_max) + ") candidates");
  }
  std::vector<RelevanceScore> scores(subgraphs.size());
  parallel_for(subgraphs.size(), options.parallelism, [&](std::size_t i) {
    scores[i] = score_subgraph(instance, subgraphs[i], backend, options);
  });

  std::vector<std::size_t> order(subgraphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return scores[x].s > scores[y].s;
  });

  RankedPairRecord record;
  record.qid = instance.qid;
  record.e1 = instance.e1;
  record.e2 = instance.e2;
  record.groundtruth = instance.groundtruth;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& sg = subgraphs[order[rank]];
    const auto& sc = scores[order[rank]];
    MetapathEntry e;
    e.pathid = static_cast<int>(rank + 1);
    e.relscore = sc.s;
    e.probscore = sc.probscore;
    e.relevant = sc.correct;
    e.stops = join(sg.node_names, " - ");
    e.reltypes = join(sg.edge_labels, " - ");
    e.nodelabels = join(sg.node_types, " - ");
    record.metapaths.push_back(std::move(e));
  }
  return record;
}

nlohmann::ordered_json candidate_record_to_json(const CandidateRecord& r) {
  nlohmann::ordered_json j = instance_to_json(r.instance);
  j["resolved"] = r.resolved;
  j["count"] = r.candidates.size();
  auto list = nlohmann::ordered_json::array();
  for (const auto& sg : r.candidates) list.push_back(subgraph_to_json(sg));
  j["candidates"] = std::move(list);
  return j;
}

CandidateRecord candidate_record_from_json(const nlohmann::json& j) {
  CandidateRecord r;
  r.instance = instance_from_json(j);
  r.resolved = j.value("resolved", true);
  if (j.contains("candidates")) {
    for (const auto& sg : j.at("candidates")) {
      r.candidates.push_back(subgraph_from_json(sg));
    }
  }
  return r;
}

std::vector<CandidateRecord> read_candidates(const std::filesystem::path& path) {
  return read_jsonl<CandidateRecord>(path, [](const nlohmann::json& j) {
    return candidate_record_from_json(j);
  });
}

CandidateRecord extract_candidates(const KnowledgeGraph& kg,
                                   const PairInstance& instance,
                                   const ExtractOptions& options) {
  CandidateRecord record;
  record.instance = instance;
  const std::uint64_t seed = derive_seed(options.seed, instance.qid);
  try {
    if (options.type_pattern.empty()) {
      record.candidates =
          enumerate_subgraphs(kg, instance.e1, instance.e2, options.max_hops,
                              options.candidate_limit, seed);
    } else {
      std::optional<std::span<const std::string>> relations;
      if (!options.relation_pattern.empty()) {
        relations = std::span<const std::string>(options.relation_pattern);
      }
      auto paths = pattern_query(kg, instance.e1, instance.e2,
                                 options.type_pattern, relations);
      record.candidates =
          paths.size() > options.candidate_limit
              ? sample_subgraphs(paths, options.candidate_limit, seed)
              : std::move(paths);
    }
  } catch (const NoSuchNode&) {
    record.resolved = false;
  }
  return record;
}

DatasetSummary write_ranked_dataset(std::span<const CandidateRecord> records,
                                    Backend& backend,
                                    const SreOptions& options,
                                    std::ostream& out) {
  DatasetSummary summary;
  const std::size_t calls_before = backend.call_count();
  for (const auto& rec : records) {
    if (rec.candidates.empty()) {
      ++summary.pairs_skipped;
      continue;
    }
    auto candidates =
        sample_subgraphs(rec.candidates, options.k_max,
                         derive_seed(options.seed, rec.instance.qid));
    try {
      auto ranked = rank_pair(rec.instance, candidates, backend, options);
      out << ranked_record_to_json(ranked).dump() << '\n';
      ++summary.pairs_processed;
    } catch (const BackendUnavailable&) {
      ++summary.pairs_failed;
    } catch (const BackendRejected&) {
      ++summary.pairs_failed;
    } catch (const CapabilityMissing&) {
      ++summary.pairs_failed;
    }
  }
  summary.backend_calls = backend.call_count() - calls_before;
  return summary;
}

DatasetSummary build_ranked_dataset(std::span<const PairInstance> instances,
                                    const KnowledgeGraph& kg, Backend& backend,
                                    const ExtractOptions& extract,
                                    const SreOptions& options,
                                    const std::filesystem::path& out_path) {
  std::vector<CandidateRecord> records;
  records.reserve(instances.size());
  for (const auto& inst : instances) {
    records.push_back(extract_candidates(kg, inst, extract));
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + out_path.string() + "'");
  auto summary = write_ranked_dataset(records, backend, options, out);
  if (!out.flush()) throw IoError("write failed for '" + out_path.string() + "'");
  return summary;
}

}  // namespace kgcd
