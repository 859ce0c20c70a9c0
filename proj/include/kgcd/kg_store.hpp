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

// Knowledge-graph snapshots loaded from triple files, and the metapath
// subgraph queries run against them.

#ifndef KGCD_KG_STORE_HPP_
#define KGCD_KG_STORE_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace kgcd {

enum class KgFormat { kTriplesJsonl, kTriplesTsv };

// Accepts "triples-jsonl" and "triples-tsv".
KgFormat parse_kg_format(std::string_view id);
std::string_view to_string(KgFormat format);

struct NodeRecord {
  std::string id;
  std::string name;
  std::string node_type;
};

struct EdgeRecord {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const EdgeRecord&) const = default;
};

enum class EdgeDirection : std::uint8_t { kForward, kReverse };

std::string_view to_string(EdgeDirection direction);
EdgeDirection parse_edge_direction(std::string_view text);

// A simple path v1..vn between a variable pair. Edge i joins node i and node
// i+1; kReverse means the stored triple points from node i+1 to node i.
// Ordering compares node ids first, so sorting yields the lexicographic
// node-id order used for sampling.
struct MetapathSubgraph {
  std::vector<std::string> node_ids;
  std::vector<std::string> node_names;
  std::vector<std::string> node_types;
  std::vector<std::string> edge_labels;
  std::vector<EdgeDirection> edge_directions;

  std::size_t hops() const { return edge_labels.size(); }

  auto operator<=>(const MetapathSubgraph&) const = default;
  bool operator==(const MetapathSubgraph&) const = default;
};

// Empty string when `subgraph` satisfies the length, non-empty and
// simple-path invariants; otherwise a description of the first violation.
std::string check_subgraph(const MetapathSubgraph& subgraph);

nlohmann::ordered_json subgraph_to_json(const MetapathSubgraph& subgraph);
MetapathSubgraph subgraph_from_json(const nlohmann::json& j);

struct LoadStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t duplicates_dropped = 0;
};

// Typed, directed, relation-labelled multigraph. Immutable once built; all
// const members are safe to call from concurrent readers.
class KnowledgeGraph {
 public:
  using NodeIndex = std::uint32_t;

  struct Incidence {
    NodeIndex neighbor;
    std::uint32_t edge;
    EdgeDirection direction;  // kForward when this node is the edge head
  };

  KnowledgeGraph() = default;

  // Validates endpoints and drops duplicate triples. Nodes must have unique
  // ids and non-empty name and type.
  static KnowledgeGraph FromRecords(std::vector<NodeRecord> nodes,
                                    std::vector<EdgeRecord> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const LoadStats& stats() const { return stats_; }

  const NodeRecord& node(NodeIndex index) const { return nodes_[index]; }
  const EdgeRecord& edge(std::size_t index) const { return edges_[index]; }
  std::span<const NodeRecord> nodes() const { return nodes_; }
  std::span<const EdgeRecord> edges() const { return edges_; }

  std::optional<NodeIndex> find_id(std::string_view id) const;

  // Case-insensitive exact match; colliding names return every id, sorted
  // by id.
  std::vector<NodeIndex> resolve(std::string_view name) const;

  std::vector<NodeIndex> nodes_of_type(std::string_view node_type) const;

  // Every edge touching `node`, both directions, in a deterministic order.
  std::span<const Incidence> incident(NodeIndex node) const;

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<std::string, NodeIndex> id_index_;
  std::unordered_multimap<std::string, NodeIndex> name_index_;
  std::unordered_map<std::string, std::vector<NodeIndex>> type_index_;
  std::vector<std::uint32_t> incidence_offsets_;
  std::vector<Incidence> incidence_;
  LoadStats stats_;
};

KnowledgeGraph parse_kg(std::istream& in, KgFormat format);
KnowledgeGraph load_kg(const std::filesystem::path& path, KgFormat format);

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();
inline constexpr int kMaxHopsCap = 4;

// All shortest paths between the variables, ignoring edge direction for
// traversal. Returns nothing when the shortest connection exceeds max_hops.
// Above `limit` results, a seeded uniform sample of the lexicographically
// sorted list is returned.
std::vector<MetapathSubgraph> enumerate_subgraphs(const KnowledgeGraph& kg,
                                                  std::string_view a,
                                                  std::string_view b,
                                                  int max_hops,
                                                  std::size_t limit,
                                                  std::uint64_t seed);

// Simple paths from a to b with exactly the given node-type sequence (and
// relation sequence, when given). Types and relations compare exactly.
std::vector<MetapathSubgraph> pattern_query(
    const KnowledgeGraph& kg, std::string_view a, std::string_view b,
    std::span<const std::string> type_pattern,
    std::optional<std::span<const std::string>> relation_pattern =
        std::nullopt);

// Uniform sample of k items without replacement that keeps input order.
std::vector<MetapathSubgraph> sample_subgraphs(
    std::span<const MetapathSubgraph> subgraphs, std::size_t k,
    std::uint64_t seed);

}  // namespace kgcd

#endif  // KGCD_KG_STORE_HPP_
