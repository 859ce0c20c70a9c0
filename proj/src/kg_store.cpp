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

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "kgcd/error.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"

namespace kgcd {

KgFormat parse_kg_format(std::string_view id) {
  if (id == "triples-jsonl") return KgFormat::kTriplesJsonl;
  if (id == "triples-tsv") return KgFormat::kTriplesTsv;
  throw InvalidArgument("unknown KG format '" + std::string(id) + "'");
}

std::string_view to_string(KgFormat format) {
  return format == KgFormat::kTriplesJsonl ? "triples-jsonl" : "triples-tsv";
}

std::string_view to_string(EdgeDirection direction) {
  return direction == EdgeDirection::kForward ? "forward" : "reverse";
}

EdgeDirection parse_edge_direction(std::string_view text) {
  if (text == "forward") return EdgeDirection::kForward;
  if (text == "reverse") return EdgeDirection::kReverse;
  throw FormatError("unknown edge direction '" + std::string(text) + "'");
}

std::string check_subgraph(const MetapathSubgraph& sg) {
  const std::size_t n = sg.node_names.size();
  if (n < 2) return "a subgraph needs at least two nodes";
  if (sg.node_types.size() != n) return "node_types length differs from node_names";
  if (sg.node_ids.size() != n) return "node_ids length differs from node_names";
  if (sg.edge_labels.size() != n - 1) return "edge_labels length must be nodes - 1";
  if (sg.edge_directions.size() != n - 1) {
    return "edge_directions length must be nodes - 1";
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : sg.node_ids) {
    if (!seen.insert(id).second) return "repeated node id '" + id + "'";
  }
  return {};
}

nlohmann::ordered_json subgraph_to_json(const MetapathSubgraph& sg) {
  nlohmann::ordered_json j;
  j["node_ids"] = sg.node_ids;
  j["node_names"] = sg.node_names;
  j["node_types"] = sg.node_types;
  j["edge_labels"] = sg.edge_labels;
  auto dirs = nlohmann::ordered_json::array();
  for (auto d : sg.edge_directions) dirs.push_back(std::string(to_string(d)));
  j["edge_directions"] = std::move(dirs);
  return j;
}

MetapathSubgraph subgraph_from_json(const nlohmann::json& j) {
  MetapathSubgraph sg;
  try {
    sg.node_names = j.at("node_names").get<std::vector<std::string>>();
    sg.node_types = j.at("node_types").get<std::vector<std::string>>();
    sg.edge_labels = j.at("edge_labels").get<std::vector<std::string>>();
    sg.node_ids = j.contains("node_ids")
                      ? j.at("node_ids").get<std::vector<std::string>>()
                      : sg.node_names;
    if (j.contains("edge_directions")) {
      for (const auto& d : j.at("edge_directions")) {
        sg.edge_directions.push_back(
            parse_edge_direction(d.get<std::string>()));
      }
    } else {
      sg.edge_directions.assign(sg.edge_labels.size(), EdgeDirection::kForward);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad subgraph object: ") + e.what());
  }
  if (auto why = check_subgraph(sg); !why.empty()) throw FormatError(why);
  return sg;
}

KnowledgeGraph KnowledgeGraph::FromRecords(std::vector<NodeRecord> nodes,
                                           std::vector<EdgeRecord> edges) {
  KnowledgeGraph kg;
  kg.nodes_ = std::move(nodes);
  for (std::size_t i = 0; i < kg.nodes_.size(); ++i) {
    const auto& n = kg.nodes_[i];
    if (n.id.empty()) throw LoadError("node with empty id", 0);
    if (n.name.empty() || n.node_type.empty()) {
      throw LoadError("node '" + n.id + "' needs a name and a type", 0);
    }
    auto index = static_cast<NodeIndex>(i);
    if (!kg.id_index_.emplace(n.id, index).second) {
      throw LoadError("duplicate node id '" + n.id + "'", 0);
    }
    kg.name_index_.emplace(ascii_lower(n.name), index);
    kg.type_index_[n.node_type].push_back(index);
  }

  std::set<EdgeRecord> seen;
  kg.edges_.reserve(edges.size());
  for (auto& e : edges) {
    if (e.relation.empty()) throw LoadError("edge with empty relation", 0);
    for (const auto* id : {&e.head, &e.tail}) {
      if (!kg.id_index_.contains(*id)) {
        throw LoadError("dangling edge endpoint '" + *id + "'", 0);
      }
    }
    if (!seen.insert(e).second) {
      ++kg.stats_.duplicates_dropped;
      continue;
    }
    kg.edges_.push_back(std::move(e));
  }

  std::vector<std::vector<Incidence>> adjacency(kg.nodes_.size());
  for (std::size_t e = 0; e < kg.edges_.size(); ++e) {
    NodeIndex h = kg.id_index_.at(kg.edges_[e].head);
    NodeIndex t = kg.id_index_.at(kg.edges_[e].tail);
    auto idx = static_cast<std::uint32_t>(e);
    adjacency[h].push_back({t, idx, EdgeDirection::kForward});
    if (h != t) adjacency[t].push_back({h, idx, EdgeDirection::kReverse});
  }
  kg.incidence_offsets_.assign(1, 0);
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end(),
              [&](const Incidence& x, const Incidence& y) {
                const auto& xn = kg.nodes_[x.neighbor].id;
                const auto& yn = kg.nodes_[y.neighbor].id;
                if (xn != yn) return xn < yn;
                const auto& xr = kg.edges_[x.edge].relation;
                const auto& yr = kg.edges_[y.edge].relation;
                if (xr != yr) return xr < yr;
                return x.direction < y.direction;
              });
    kg.incidence_.insert(kg.incidence_.end(), list.begin(), list.end());
    kg.incidence_offsets_.push_back(
        static_cast<std::uint32_t>(kg.incidence_.size()));
  }
  kg.stats_.nodes = kg.nodes_.size();
  kg.stats_.edges = kg.edges_.size();
  return kg;
}

std::optional<KnowledgeGraph::NodeIndex> KnowledgeGraph::find_id(
    std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<KnowledgeGraph::NodeIndex> KnowledgeGraph::resolve(
    std::string_view name) const {
  std::vector<NodeIndex> out;
  auto [lo, hi] = name_index_.equal_range(ascii_lower(name));
  for (auto it = lo; it != hi; ++it) out.push_back(it->second);
  std::sort(out.begin(), out.end(), [&](NodeIndex x, NodeIndex y) {
    return nodes_[x].id < nodes_[y].id;
  });
  return out;
}

std::vector<KnowledgeGraph::NodeIndex> KnowledgeGraph::nodes_of_type(
    std::string_view node_type) const {
  auto it = type_index_.find(std::string(node_type));
  if (it == type_index_.end()) return {};
  return it->second;
}

std::span<const KnowledgeGraph::Incidence> KnowledgeGraph::incident(
    NodeIndex node) const {
  return std::span<const Incidence>(incidence_)
      .subspan(incidence_offsets_[node],
               incidence_offsets_[node + 1] - incidence_offsets_[node]);
}

namespace {

// Accumulates node declarations across lines. A node object with only an id
// is a reference that must be declared (name and type) somewhere in the file.
class GraphBuilder {
 public:
  void add_node(const std::string& id, const std::string& name,
                const std::string& type, std::size_t line) {
    if (id.empty()) throw LoadError("node with empty id", line);
    auto [it, inserted] = index_.try_emplace(id, nodes_.size());
    if (inserted) {
      nodes_.push_back({id, name, type});
      first_seen_.push_back(line);
      return;
    }
    NodeRecord& existing = nodes_[it->second];
    if (name.empty() && type.empty()) return;
    if (existing.name.empty() && existing.node_type.empty()) {
      existing.name = name;
      existing.node_type = type;
      return;
    }
    if (existing.name != name || existing.node_type != type) {
      throw LoadError("conflicting declaration for node '" + id + "'", line);
    }
  }

  void add_edge(const std::string& head, const std::string& relation,
                const std::string& tail, std::size_t line) {
    if (relation.empty()) throw LoadError("empty relation", line);
    edges_.push_back({head, relation, tail});
  }

  KnowledgeGraph build() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (n.name.empty() && n.node_type.empty()) {
        throw LoadError("dangling edge endpoint '" + n.id + "'",
                        first_seen_[i]);
      }
      if (n.name.empty() || n.node_type.empty()) {
        throw LoadError("node '" + n.id + "' needs both name and type",
                        first_seen_[i]);
      }
    }
    return KnowledgeGraph::FromRecords(std::move(nodes_), std::move(edges_));
  }

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<std::size_t> first_seen_;
  std::map<std::string, std::size_t> index_;
  std::vector<EdgeRecord> edges_;
};

std::string optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return it->get<std::string>();
}

void parse_jsonl_line(const std::string& line, std::size_t lineno,
                      GraphBuilder& builder) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  try {
    const auto& head = j.at("head");
    const auto& tail = j.at("tail");
    std::string head_id = head.at("id").get<std::string>();
    std::string tail_id = tail.at("id").get<std::string>();
    builder.add_node(head_id, optional_string(head, "name"),
                     optional_string(head, "type"), lineno);
    builder.add_node(tail_id, optional_string(tail, "name"),
                     optional_string(tail, "type"), lineno);
    builder.add_edge(head_id, j.at("relation").get<std::string>(), tail_id,
                     lineno);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed triple: ") + e.what(), lineno);
  }
}

void parse_tsv_line(const std::string& line, std::size_t lineno,
                    GraphBuilder& builder) {
  auto fields = split(line, '\t');
  if (fields.size() != 7) {
    throw LoadError("expected 7 tab-separated fields, got " +
                        std::to_string(fields.size()),
                    lineno);
  }
  builder.add_node(fields[0], fields[1], fields[2], lineno);
  builder.add_node(fields[4], fields[5], fields[6], lineno);
  builder.add_edge(fields[0], fields[3], fields[4], lineno);
}

}  // namespace

KnowledgeGraph parse_kg(std::istream& in, KgFormat format) {
  GraphBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (format == KgFormat::kTriplesJsonl) {
      parse_jsonl_line(line, lineno, builder);
    } else {
      parse_tsv_line(line, lineno, builder);
    }
  }
  return builder.build();
}

KnowledgeGraph load_kg(const std::filesystem::path& path, KgFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open KG file '" + path.string() + "'");
  return parse_kg(in, format);
}

namespace {

using NodeIndex = KnowledgeGraph::NodeIndex;
constexpr int kUnreached = -1;

std::vector<NodeIndex> resolve_or_throw(const KnowledgeGraph& kg,
                                        std::string_view name) {
  auto ids = kg.resolve(name);
  if (ids.empty()) throw NoSuchNode(std::string(name));
  return ids;
}

std::vector<int> bfs_distances(const KnowledgeGraph& kg, NodeIndex source,
                               int max_depth) {
  std::vector<int> dist(kg.node_count(), kUnreached);
  std::vector<NodeIndex> frontier{source};
  dist[source] = 0;
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    std::vector<NodeIndex> next;
    for (NodeIndex u : frontier) {
      for (const auto& inc : kg.incident(u)) {
        if (dist[inc.neighbor] == kUnreached) {
          dist[inc.neighbor] = depth + 1;
          next.push_back(inc.neighbor);
        }
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

// Edge-level path under construction; converted once complete.
struct PathStep {
  NodeIndex node;
  std::uint32_t edge;
  EdgeDirection direction;
};

MetapathSubgraph make_subgraph(const KnowledgeGraph& kg, NodeIndex start,
                               std::span<const PathStep> steps) {
  MetapathSubgraph sg;
  auto push_node = [&](NodeIndex n) {
    const auto& rec = kg.node(n);
    sg.node_ids.push_back(rec.id);
    sg.node_names.push_back(rec.name);
    sg.node_types.push_back(rec.node_type);
  };
  push_node(start);
  for (const auto& step : steps) {
    sg.edge_labels.push_back(kg.edge(step.edge).relation);
    sg.edge_directions.push_back(step.direction);
    push_node(step.node);
  }
  return sg;
}

void collect_shortest(const KnowledgeGraph& kg, NodeIndex u, int depth,
                      int length, const std::vector<int>& from_source,
                      const std::vector<int>& from_target, NodeIndex start,
                      std::vector<PathStep>& steps,
                      std::vector<MetapathSubgraph>& out) {
  if (depth == length) {
    out.push_back(make_subgraph(kg, start, steps));
    return;
  }
  for (const auto& inc : kg.incident(u)) {
    NodeIndex v = inc.neighbor;
    if (from_source[v] != depth + 1 || from_target[v] != length - depth - 1) {
      continue;
    }
    steps.push_back({v, inc.edge, inc.direction});
    collect_shortest(kg, v, depth + 1, length, from_source, from_target, start,
                     steps, out);
    steps.pop_back();
  }
}

}  // namespace

std::vector<MetapathSubgraph> enumerate_subgraphs(const KnowledgeGraph& kg,
                                                  std::string_view a,
                                                  std::string_view b,
                                                  int max_hops,
                                                  std::size_t limit,
                                                  std::uint64_t seed) {
  if (max_hops < 1 || max_hops > kMaxHopsCap) {
    throw InvalidArgument("max_hops must be in [1, 4]");
  }
  if (limit == 0) throw InvalidArgument("limit must be positive");
  auto sources = resolve_or_throw(kg, a);
  auto targets = resolve_or_throw(kg, b);

  std::vector<std::vector<int>> source_dist;
  int best = max_hops + 1;
  for (NodeIndex s : sources) {
    source_dist.push_back(bfs_distances(kg, s, max_hops));
    for (NodeIndex t : targets) {
      int d = source_dist.back()[t];
      if (s != t && d != kUnreached) best = std::min(best, d);
    }
  }
  if (best > max_hops) return {};

  std::vector<MetapathSubgraph> paths;
  std::vector<PathStep> steps;
  for (std::size_t si = 0; si < sources.size(); ++si) {
    for (NodeIndex t : targets) {
      if (sources[si] == t || source_dist[si][t] != best) continue;
      auto target_dist = bfs_distances(kg, t, best);
      collect_shortest(kg, sources[si], 0, best, source_dist[si], target_dist,
                       sources[si], steps, paths);
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.size() > limit) return sample_subgraphs(paths, limit, seed);
  return paths;
}

namespace {

struct PatternSearch {
  const KnowledgeGraph& kg;
  std::span<const std::string> types;
  std::optional<std::span<const std::string>> relations;
  std::unordered_set<NodeIndex> targets;
  std::vector<bool> on_path;
  std::vector<PathStep> steps;
  std::vector<MetapathSubgraph> out;

  void extend(NodeIndex start, NodeIndex u) {
    const std::size_t depth = steps.size();
    if (depth + 1 == types.size()) {
      if (targets.contains(u)) out.push_back(make_subgraph(kg, start, steps));
      return;
    }
    for (const auto& inc : kg.incident(u)) {
      NodeIndex v = inc.neighbor;
      if (on_path[v] || kg.node(v).node_type != types[depth + 1]) continue;
      if (relations && kg.edge(inc.edge).relation != (*relations)[depth]) {
        continue;
      }
      on_path[v] = true;
      steps.push_back({v, inc.edge, inc.direction});
      extend(start, v);
      steps.pop_back();
      on_path[v] = false;
    }
  }
};

}  // namespace

std::vector<MetapathSubgraph> pattern_query(
    const KnowledgeGraph& kg, std::string_view a, std::string_view b,
    std::span<const std::string> type_pattern,
    std::optional<std::span<const std::string>> relation_pattern) {
  if (type_pattern.size() < 2) {
    throw InvalidArgument("type pattern needs at least two node types");
  }
  if (relation_pattern && relation_pattern->size() + 1 != type_pattern.size()) {
    throw InvalidArgument(
        "relation pattern length must be type pattern length - 1");
  }
  auto sources = resolve_or_throw(kg, a);
  auto targets = resolve_or_throw(kg, b);

  PatternSearch search{kg, type_pattern, relation_pattern,
                       {targets.begin(), targets.end()},
                       std::vector<bool>(kg.node_count(), false), {}, {}};
  for (NodeIndex s : sources) {
    if (kg.node(s).node_type != type_pattern.front()) continue;
    search.on_path[s] = true;
    search.extend(s, s);
    search.on_path[s] = false;
  }
  std::sort(search.out.begin(), search.out.end());
  return std::move(search.out);
}

std::vector<MetapathSubgraph> sample_subgraphs(
    std::span<const MetapathSubgraph> subgraphs, std::size_t k,
    std::uint64_t seed) {
  if (k == 0) throw InvalidArgument("sample size must be positive");
  if (subgraphs.size() <= k) return {subgraphs.begin(), subgraphs.end()};
  // Selection sampling: each item is kept with probability
  // (still needed) / (still available), which is uniform over k-subsets.
  Engine rng(seed);
  std::vector<MetapathSubgraph> out;
  out.reserve(k);
  std::size_t remaining = subgraphs.size();
  for (const auto& sg : subgraphs) {
    std::size_t needed = k - out.size();
    if (uniform01(rng) * static_cast<double>(remaining) <
        static_cast<double>(needed)) {
      out.push_back(sg);
      if (out.size() == k) break;
    }
    --remaining;
  }
  return out;
}

}  // namespace kgcd
