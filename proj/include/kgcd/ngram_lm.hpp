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

// Neural n-gram language model whose token embeddings serve as ranking
// features, and the feature extraction built on it.

#ifndef KGCD_NGRAM_LM_HPP_
#define KGCD_NGRAM_LM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace kgcd {

using TokenSequence = std::vector<std::string>;

struct NgramLmConfig {
  int n = 2;
  int dim = 128;
  int epochs = 5;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

class NgramLm {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBos = "<s>";

  int n() const { return n_; }
  int dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }

  // Index of `token`, or of the UNK entry when unseen.
  std::size_t index_of(std::string_view token) const;
  std::span<const double> embedding(std::size_t index) const;
  std::span<const double> embedding(std::string_view token) const {
    return embedding(index_of(token));
  }

  // Most likely next token after `context` (its last n-1 tokens are used).
  std::string predict_next(std::span<const std::string> context) const;

  // Mean next-token cross-entropy over the corpus.
  double corpus_loss(std::span<const TokenSequence> corpus) const;

  // Mean training loss per epoch.
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  nlohmann::ordered_json to_json() const;
  static NgramLm FromJson(const nlohmann::json& j);

  bool operator==(const NgramLm&) const = default;

 private:
  friend NgramLm train_ngram_lm(std::span<const TokenSequence> corpus,
                                const NgramLmConfig& config);

  std::vector<double> context_vector(std::span<const std::size_t> ids) const;
  std::vector<double> logits(std::span<const double> context) const;

  int n_ = 2;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> embeddings_;   // vocab x dim, row-major
  std::vector<double> output_;       // dim x vocab, row-major
  std::vector<double> output_bias_;  // vocab
  std::vector<double> epoch_losses_;
};

// Trains by stochastic gradient descent on next-token cross-entropy, where
// the context representation is the mean embedding of the previous n-1
// tokens (sequence starts are padded with <s>). Deterministic in the seed.
NgramLm train_ngram_lm(std::span<const TokenSequence> corpus,
                       const NgramLmConfig& config);

inline constexpr std::size_t kDefaultHashBuckets = 1024;

struct FeatureVector {
  std::vector<double> dense;  // mean token embedding
  std::vector<std::pair<std::uint32_t, double>> hashed;  // sorted, no zeros

  std::vector<double> hashed_dense(std::size_t buckets) const;
};

// Stable 64-bit hash of an n-gram.
std::uint64_t hash_ngram(std::span<const std::string> gram);

// dense: mean embedding row. hashed: counts of all 1..n-grams, bucketed by
// hash_ngram mod `buckets`.
FeatureVector featurize(const NgramLm& lm, std::span<const std::string> tokens,
                        std::size_t buckets = kDefaultHashBuckets);

}  // namespace kgcd

#endif  // KGCD_NGRAM_LM_HPP_
