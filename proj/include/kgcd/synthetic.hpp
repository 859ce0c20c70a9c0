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

// Planted-motif fixtures. Causal pairs (drug i, disease i) are joined by one
// drug-mediator-disease path plus decoy two-hop paths; non-causal pairs get
// decoys only. Node names begin with their type word so the mock oracle can
// read types from any rendering.

#ifndef KGCD_SYNTHETIC_HPP_
#define KGCD_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgcd/kg_store.hpp"
#include "kgcd/llm_gateway.hpp"
#include "kgcd/relevancy.hpp"

namespace kgcd {

struct SyntheticConfig {
  std::size_t causal_pairs = 200;
  std::size_t noncausal_pairs = 60;
  std::size_t min_decoys = 5;
  std::size_t max_decoys = 7;
  std::size_t pool_size = 40;  // intermediaries per decoy type and mediators
  double base_confidence = 0.9;
  double flip_rate = 0.02;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
  std::vector<PairInstance> pairs;  // causal pairs first
  MockOracleConfig oracle;
};

inline const std::vector<std::string> kPlantedMotif = {"drug", "mediator",
                                                       "disease"};

SyntheticData make_synthetic(const SyntheticConfig& config);

// One fully declared triple per line.
void write_kg_jsonl(std::span<const NodeRecord> nodes,
                    std::span<const EdgeRecord> edges, std::ostream& out);

// kg.jsonl, pairs.jsonl and mock.json under `dir`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace kgcd

#endif  // KGCD_SYNTHETIC_HPP_
