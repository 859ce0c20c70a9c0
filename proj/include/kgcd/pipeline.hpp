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

#ifndef KGCD_PIPELINE_HPP_
#define KGCD_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgcd/gbdt.hpp"
#include "kgcd/kg_store.hpp"
#include "kgcd/llm_gateway.hpp"
#include "kgcd/ngram_lm.hpp"
#include "kgcd/ranker.hpp"

namespace kgcd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDegraded = 1;
inline constexpr int kExitConfig = 2;

struct PipelineConfig {
  // Directory that relative paths in the file resolve against.
  std::filesystem::path base_dir = ".";
  std::uint64_t seed = 0;

  struct Kg {
    std::string path;
    std::string format = "triples-jsonl";
    int max_hops = 2;
    std::size_t candidate_limit = 50;
    std::vector<std::string> type_pattern;
    std::vector<std::string> relation_pattern;
  } kg;

  struct Llm {
    std::string backend = "mock";  // mock | http
    std::string endpoint;
    std::string model;
    std::string api_key_env = "KGCD_API_KEY";
    int parallelism = 4;
    int max_retries = 3;
    int base_backoff_ms = 200;
    int timeout_s = 60;
    std::string mock_config_path;
  } llm;

  struct Sre {
    std::size_t k_max = 10;
    std::string template_path;  // empty: built-in template
    int max_tokens = 8;
  } sre;

  struct Ranker {
    std::string kind = "neural";  // neural | gbdt | similarity | random
    std::string loss = "listnet";
    NgramLmConfig ngram;          // seed is derived, not read
    GbdtConfig gbdt;
    TrainConfig train;            // seed below
    std::optional<std::uint64_t> train_seed;
    bool include_types = true;
    std::size_t hash_buckets = 1024;
  } ranker;

  struct Discovery {
    std::size_t k = 1;
    std::string style = "plain_arrows";
    std::string template_path;
    std::string mode = "ranker";  // ranker | no-subgraph | permutation | random | similarity
  } discovery;

  struct Eval {
    std::vector<std::size_t> ks = {1, 3, 5};
  } eval;

  static PipelineConfig FromJson(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir);
  static PipelineConfig Load(const std::filesystem::path& path);

  // Effective configuration, plus seeds and template hashes, for echoing
  // into artifacts.
  nlohmann::ordered_json to_json() const;

  std::filesystem::path resolve(const std::string& path) const;

  // Validates enum-like fields and numeric ranges; throws ConfigError.
  void validate() const;
};

std::unique_ptr<Backend> make_backend(const PipelineConfig& config);

// Exit codes follow kExit*. Diagnostics go to `log`.
int cmd_extract(const PipelineConfig& config,
                const std::filesystem::path& pairs_path,
                const std::filesystem::path& out_path, std::ostream& log);

int cmd_estimate(const PipelineConfig& config,
                 const std::filesystem::path& candidates_path,
                 const std::filesystem::path& out_path, std::ostream& log,
                 Backend* backend = nullptr);

int cmd_train(const PipelineConfig& config,
              const std::filesystem::path& dataset_path,
              const std::filesystem::path& model_path, std::ostream& log);

int cmd_rank(const PipelineConfig& config,
             const std::filesystem::path& model_path,
             const std::filesystem::path& candidates_path,
             const std::filesystem::path& out_path, std::ostream& log);

// `model_path` may be empty for the no-subgraph, permutation and random
// modes.
int cmd_discover(const PipelineConfig& config,
                 const std::filesystem::path& model_path,
                 const std::filesystem::path& pairs_path,
                 const std::filesystem::path& out_path, std::ostream& log,
                 Backend* backend = nullptr);

struct EvalInputs {
  std::filesystem::path predictions;
  std::filesystem::path gold;
  std::filesystem::path gold_adjacency;  // optional
  std::filesystem::path model;           // optional, with dataset
  std::filesystem::path ranked_dataset;  // optional, with model
};

int cmd_eval(const PipelineConfig& config, const EvalInputs& inputs,
             const std::filesystem::path& out_path, std::ostream& log);

// Writes kg.jsonl, pairs.jsonl, mock.json and config.json under `dir`.
int cmd_synth(std::uint64_t seed, std::size_t causal_pairs,
              std::size_t noncausal_pairs, double flip_rate,
              const std::filesystem::path& dir, std::ostream& log);

}  // namespace kgcd

#endif  // KGCD_PIPELINE_HPP_
