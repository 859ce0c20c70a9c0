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

// Text-generation backends that return per-token log-probabilities, plus
// parsing of the causal / non-causal answer out of a completion.

#ifndef KGCD_LLM_GATEWAY_HPP_
#define KGCD_LLM_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kgcd {

enum class Label { kCausal, kNonCausal };

std::string_view to_string(Label label);
// Accepts "causal" / "non-causal" (any case), "1" / "0".
Label parse_label(std::string_view text);

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 8;
  double temperature = 0.0;
  bool want_logprobs = true;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct Completion {
  std::string text;
  std::vector<TokenLogprob> tokens;
  std::string backend_id;
  // False when the server reported log-probs without token strings; label
  // probabilities then use every token.
  bool token_text_available = true;
};

// Counts calls so callers can audit how many requests a stage issued.
class Backend {
 public:
  virtual ~Backend() = default;

  Completion complete(const CompletionRequest& request);
  virtual std::string id() const = 0;
  std::size_t call_count() const { return calls_.load(); }

 protected:
  virtual Completion do_complete(const CompletionRequest& request) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

// Deterministic stand-in for a hosted model. The answer is "causal" iff a
// configured node-type motif occurs in a path of the prompt's relation-path
// block; a seeded hash of the prompt flips the answer with probability
// flip_rate. Ranking prompts ("Rank the ...") get a bracketed permutation
// that puts motif-bearing paths first.
struct MockOracleConfig {
  std::vector<std::vector<std::string>> causal_motifs;
  double base_confidence = 0.9;
  std::uint64_t noise_seed = 0;
  double flip_rate = 0.0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static MockOracleConfig FromJson(const nlohmann::json& j);
  static MockOracleConfig Load(const std::filesystem::path& path);
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOracleConfig config);
  std::string id() const override { return "mock"; }
  const MockOracleConfig& config() const { return config_; }

  // Whether any motif matches one of the node-type sequences.
  bool matches_motif(
      const std::vector<std::vector<std::string>>& type_sequences) const;

 protected:
  Completion do_complete(const CompletionRequest& request) override;

 private:
  MockOracleConfig config_;
};

// Node-type sequences (lowercased leading word of each path element) of the
// paths listed after the last "[Relation Paths]:" marker, one per line until
// a blank line or a line opening with '['.
std::vector<std::vector<std::string>> relation_block_type_sequences(
    std::string_view prompt);

// Type sequence of a single verbalized path in any style.
std::vector<std::string> path_type_sequence(std::string_view rendered_path);

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/completions
  std::string model;
  std::string api_key_env;  // name of the variable holding the bearer token
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{200};
  int parallelism = 4;
  std::chrono::seconds timeout{60};
};

// OpenAI-compatible /completions client. Transient failures (connection
// errors, 429, 5xx) are retried with exponential backoff; the total number
// of attempts never exceeds 1 + max_retries.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;
  std::string id() const override;
  std::size_t attempt_count() const { return attempts_.load(); }

 protected:
  Completion do_complete(const CompletionRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  std::atomic<std::size_t> attempts_{0};
};

// Parses an OpenAI-style completions response body.
Completion parse_completion_response(const nlohmann::json& body,
                                     bool want_logprobs,
                                     const std::string& backend_id);

struct LabelVariants {
  std::vector<std::string> causal{"causal"};
  std::vector<std::string> non_causal{"non-causal", "noncausal", "non causal"};
};

struct LabelProbability {
  Label label;
  double p = 0.0;              // exp(mean log-prob of the label tokens)
  double mean_logprob = 0.0;   // the same mean, before exponentiation
};

// Earliest label mention wins; non-causal spellings are tried before causal
// so "non-causal" never reads as "causal". Throws UnparseableLabel when no
// variant occurs and CapabilityMissing when the completion has no log-probs.
LabelProbability label_probability(const Completion& completion,
                                   const LabelVariants& variants = {});

}  // namespace kgcd

#endif  // KGCD_LLM_GATEWAY_HPP_
