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


// Command-line entry point: kgcd <extract|estimate|train|rank|discover|eval|synth>.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kgcd/error.hpp"
#include "kgcd/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

kgcd::PipelineConfig load_config(const GlobalFlags& flags) {
  kgcd::PipelineConfig config;
  if (!flags.config_path.empty()) {
    config = kgcd::PipelineConfig::Load(flags.config_path);
  } else {
    config.base_dir = fs::current_path();
  }
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph subgraph retrieval for LLM causal discovery"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Pipeline config (JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Override the top-level seed");
  app.add_option("--out", flags.out, "Output artifact path");

  std::string pairs, candidates, dataset, model, predictions, gold, gold_adj;
  std::optional<std::string> mode, style;
  std::optional<std::size_t> k;

  auto* extract = app.add_subcommand("extract", "Enumerate candidate subgraphs per pair");
  extract->add_option("--pairs", pairs, "Pairs JSON Lines")->required();

  auto* estimate = app.add_subcommand("estimate", "Score candidates with the LLM (SRE)");
  estimate->add_option("--candidates", candidates, "Candidates JSON Lines")->required();

  auto* train = app.add_subcommand("train", "Train a subgraph ranker");
  train->add_option("--dataset", dataset, "Ranked dataset JSON Lines")->required();

  auto* rank = app.add_subcommand("rank", "Rank candidates with a trained model");
  rank->add_option("--model", model, "Model JSON")->required();
  rank->add_option("--candidates", candidates, "Candidates JSON Lines")->required();

  auto* discover = app.add_subcommand("discover", "Classify pairs with top-k subgraphs");
  discover->add_option("--model", model, "Model JSON");
  discover->add_option("--pairs", pairs, "Pairs JSON Lines")->required();
  discover->add_option("--mode", mode,
                       "ranker | no-subgraph | permutation | random | similarity");
  discover->add_option("--k", k, "Subgraphs per prompt");
  discover->add_option("--style", style, "full | typed_arrows | plain_arrows | hyphen");

  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  eval->add_option("--predictions", predictions, "Predictions JSON Lines")->required();
  eval->add_option("--gold", gold, "Gold pairs JSON Lines")->required();
  eval->add_option("--gold-adjacency", gold_adj, "Gold graph JSON");
  eval->add_option("--model", model, "Model JSON for ranking metrics");
  eval->add_option("--dataset", dataset, "Ranked dataset for ranking metrics");

  std::size_t causal_pairs = 200, noncausal_pairs = 60;
  double flip_rate = 0.02;
  auto* synth = app.add_subcommand("synth", "Write a planted-motif fixture directory");
  synth->add_option("--causal", causal_pairs, "Causal pairs");
  synth->add_option("--noncausal", noncausal_pairs, "Non-causal pairs");
  synth->add_option("--flip-rate", flip_rate, "Oracle flip probability")
      ->check(CLI::Range(0.0, 1.0));

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kgcd::kExitOk : kgcd::kExitConfig;
  }
  if (flags.out.empty()) {
    std::cerr << "error: --out is required\n";
    return kgcd::kExitConfig;
  }

  try {
    if (synth->parsed()) {
      return kgcd::cmd_synth(flags.seed.value_or(0), causal_pairs, noncausal_pairs,
                             flip_rate, flags.out, std::cerr);
    }
    kgcd::PipelineConfig config = load_config(flags);
    if (mode) config.discovery.mode = *mode;
    if (k) config.discovery.k = *k;
    if (style) config.discovery.style = *style;
    config.validate();

    if (extract->parsed()) return kgcd::cmd_extract(config, pairs, flags.out, std::cerr);
    if (estimate->parsed()) {
      return kgcd::cmd_estimate(config, candidates, flags.out, std::cerr);
    }
    if (train->parsed()) return kgcd::cmd_train(config, dataset, flags.out, std::cerr);
    if (rank->parsed()) {
      return kgcd::cmd_rank(config, model, candidates, flags.out, std::cerr);
    }
    if (discover->parsed()) {
      return kgcd::cmd_discover(config, model, pairs, flags.out, std::cerr);
    }
    kgcd::EvalInputs inputs{predictions, gold, gold_adj, model, dataset};
    return kgcd::cmd_eval(config, inputs, flags.out, std::cerr);
  } catch (const kgcd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kgcd::kExitConfig;
  }
}
