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

#include "kgcd/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "kgcd/error.hpp"
#include "kgcd/random.hpp"

namespace kgcd {

namespace {

struct DecoyType {
  const char* type;
  const char* from_drug;
  const char* to_disease;
};

constexpr DecoyType kDecoys[] = {
    {"gene", "binds", "associates"},
    {"anatomy", "localizes", "presents_in"},
    {"pathway", "perturbs", "participates"},
    {"sideeffect", "causes", "resembles"},
};

class Builder {
 public:
  explicit Builder(std::size_t expected_nodes, std::uint64_t seed)
      : ids_(shuffled_indices(expected_nodes, seed)) {}

  // Ids come from a shuffled pool so that id order carries no signal.
  const std::string& node(const std::string& type, std::size_t index) {
    const std::string name = type + " " + std::to_string(index);
    auto it = by_name_.find(name);
    if (it != by_name_.end()) return nodes_[it->second].id;
    if (next_ >= ids_.size()) throw InvalidArgument("synthetic id pool exhausted");
    char id[32];
    std::snprintf(id, sizeof id, "N%05zu", ids_[next_++]);
    by_name_.emplace(name, nodes_.size());
    nodes_.push_back({id, name, type});
    return nodes_.back().id;
  }

  void edge(const std::string& head, const std::string& relation,
            const std::string& tail) {
    edges_.push_back({head, relation, tail});
  }

  std::vector<NodeRecord> take_nodes() { return std::move(nodes_); }
  std::vector<EdgeRecord> take_edges() { return std::move(edges_); }

 private:
  std::vector<std::size_t> ids_;
  std::size_t next_ = 0;
  std::map<std::string, std::size_t> by_name_;
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
};

}  // namespace

SyntheticData make_synthetic(const SyntheticConfig& config) {
  const std::size_t decoy_types = std::size(kDecoys);
  if (config.min_decoys > config.max_decoys ||
      config.max_decoys > decoy_types * config.pool_size ||
      config.pool_size == 0) {
    throw InvalidArgument("inconsistent synthetic configuration");
  }
  const std::size_t pairs = config.causal_pairs + config.noncausal_pairs;
  const std::size_t capacity = 2 * pairs + (decoy_types + 1) * config.pool_size;
  Builder b(capacity, derive_seed(config.seed, "synthetic-ids"));
  Engine rng(derive_seed(config.seed, "synthetic-paths"));

  SyntheticData data;
  for (std::size_t i = 0; i < pairs; ++i) {
    const bool causal = i < config.causal_pairs;
    const std::string drug = b.node("drug", i);
    const std::string disease = b.node("disease", i);
    if (causal) {
      const std::string m = b.node("mediator", uniform_index(rng, config.pool_size));
      b.edge(drug, "induces", m);
      b.edge(m, "leads_to", disease);
    }
    const std::size_t decoys =
        config.min_decoys +
        uniform_index(rng, config.max_decoys - config.min_decoys + 1);
    std::vector<std::pair<std::size_t, std::size_t>> used;
    while (used.size() < decoys) {
      const std::size_t t = uniform_index(rng, decoy_types);
      const std::size_t k = uniform_index(rng, config.pool_size);
      if (std::find(used.begin(), used.end(), std::pair{t, k}) != used.end()) {
        continue;
      }
      used.emplace_back(t, k);
      const std::string x = b.node(kDecoys[t].type, k);
      b.edge(drug, kDecoys[t].from_drug, x);
      b.edge(x, kDecoys[t].to_disease, disease);
    }
    PairInstance inst;
    char qid[32];
    std::snprintf(qid, sizeof qid, "q%04zu", i);
    inst.qid = qid;
    inst.e1 = "drug " + std::to_string(i);
    inst.e2 = "disease " + std::to_string(i);
    inst.context = inst.e1 + " and " + inst.e2 + " were recorded in the same cohort.";
    inst.groundtruth = causal ? Label::kCausal : Label::kNonCausal;
    data.pairs.push_back(std::move(inst));
  }
  data.nodes = b.take_nodes();
  data.edges = b.take_edges();
  data.oracle.causal_motifs = {kPlantedMotif};
  data.oracle.base_confidence = config.base_confidence;
  data.oracle.flip_rate = config.flip_rate;
  data.oracle.noise_seed = derive_seed(config.seed, "oracle-noise");
  return data;
}

void write_kg_jsonl(std::span<const NodeRecord> nodes,
                    std::span<const EdgeRecord> edges, std::ostream& out) {
  std::map<std::string, const NodeRecord*> by_id;
  for (const auto& n : nodes) by_id.emplace(n.id, &n);
  auto node_json = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidArgument("edge names unknown node " + id);
    nlohmann::ordered_json j;
    j["id"] = id;
    j["name"] = it->second->name;
    j["type"] = it->second->node_type;
    return j;
  };
  for (const auto& e : edges) {
    nlohmann::ordered_json j;
    j["head"] = node_json(e.head);
    j["relation"] = e.relation;
    j["tail"] = node_json(e.tail);
    out << j.dump() << '\n';
  }
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("kg.jsonl");
    write_kg_jsonl(data.nodes, data.edges, out);
  }
  {
    auto out = open("pairs.jsonl");
    for (const auto& p : data.pairs) out << instance_to_json(p).dump() << '\n';
  }
  {
    auto out = open("mock.json");
    out << data.oracle.to_json().dump(2) << '\n';
  }
}

}  // namespace kgcd
