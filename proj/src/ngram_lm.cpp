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

#include "kgcd/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "kgcd/error.hpp"
#include "kgcd/random.hpp"

namespace kgcd {

std::size_t NgramLm::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  return index_.at(std::string(kUnk));
}

std::span<const double> NgramLm::embedding(std::size_t index) const {
  return std::span<const double>(embeddings_)
      .subspan(index * static_cast<std::size_t>(dim_), dim_);
}

std::vector<double> NgramLm::context_vector(
    std::span<const std::size_t> ids) const {
  std::vector<double> h(dim_, 0.0);
  for (std::size_t id : ids) {
    auto row = embedding(id);
    for (int k = 0; k < dim_; ++k) h[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (double& v : h) v *= inv;
  return h;
}

std::vector<double> NgramLm::logits(std::span<const double> context) const {
  const std::size_t vocab = vocab_.size();
  std::vector<double> z(output_bias_);
  for (int k = 0; k < dim_; ++k) {
    const double hk = context[k];
    const double* row = &output_[static_cast<std::size_t>(k) * vocab];
    for (std::size_t v = 0; v < vocab; ++v) z[v] += hk * row[v];
  }
  return z;
}

namespace {

// Context ids for predicting position `pos` of `ids`, left-padded with bos.
std::vector<std::size_t> context_ids(std::span<const std::size_t> ids,
                                     std::size_t pos, int n, std::size_t bos) {
  const auto width = static_cast<std::size_t>(n - 1);
  std::vector<std::size_t> ctx;
  ctx.reserve(width);
  for (std::size_t j = 0; j < width; ++j) {
    std::size_t back = width - j;  // distance from pos
    ctx.push_back(pos >= back ? ids[pos - back] : bos);
  }
  return ctx;
}

double log_softmax_at(std::vector<double>& z, std::size_t target) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;  // z now holds probabilities
  return std::log(std::max(z[target], 1e-300));
}

}  // namespace

std::string NgramLm::predict_next(std::span<const std::string> context) const {
  std::vector<std::size_t> ids;
  for (const auto& t : context) ids.push_back(index_of(t));
  auto ctx = context_ids(ids, ids.size(), n_, index_of(kBos));
  auto z = logits(context_vector(ctx));
  auto best = std::max_element(z.begin(), z.end()) - z.begin();
  return vocab_[static_cast<std::size_t>(best)];
}

double NgramLm::corpus_loss(std::span<const TokenSequence> corpus) const {
  double total = 0.0;
  std::size_t count = 0;
  const std::size_t bos = index_of(kBos);
  for (const auto& seq : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& t : seq) ids.push_back(index_of(t));
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
      auto z = logits(context_vector(context_ids(ids, pos, n_, bos)));
      total -= log_softmax_at(z, ids[pos]);
      ++count;
    }
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

NgramLm train_ngram_lm(std::span<const TokenSequence> corpus,
                       const NgramLmConfig& config) {
  if (config.n < 2) throw InvalidArgument("n-gram order must be >= 2");
  if (config.dim <= 0) throw InvalidArgument("embedding dimension must be > 0");
  if (config.epochs < 0 || config.learning_rate <= 0) {
    throw InvalidArgument("bad n-gram training schedule");
  }
  std::size_t total_tokens = 0;
  for (const auto& s : corpus) total_tokens += s.size();
  if (total_tokens == 0) throw InvalidArgument("empty n-gram corpus");

  NgramLm lm;
  lm.n_ = config.n;
  lm.dim_ = config.dim;
  lm.seed_ = config.seed;
  std::set<std::string> tokens;
  for (const auto& s : corpus) tokens.insert(s.begin(), s.end());
  tokens.insert(std::string(NgramLm::kBos));
  tokens.insert(std::string(NgramLm::kUnk));
  lm.vocab_.assign(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.index_[lm.vocab_[i]] = i;

  const std::size_t vocab = lm.vocab_.size();
  const auto dim = static_cast<std::size_t>(config.dim);
  Engine rng(config.seed);
  lm.embeddings_.resize(vocab * dim);
  for (double& v : lm.embeddings_) v = uniform(rng, -0.5, 0.5);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  lm.output_.resize(dim * vocab);
  for (double& v : lm.output_) v = uniform(rng, -scale, scale);
  lm.output_bias_.assign(vocab, 0.0);

  struct Example {
    std::vector<std::size_t> context;
    std::size_t target;
  };
  std::vector<Example> examples;
  const std::size_t bos = lm.index_of(NgramLm::kBos);
  for (const auto& seq : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& t : seq) ids.push_back(lm.index_of(t));
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
      examples.push_back({context_ids(ids, pos, config.n, bos), ids[pos]});
    }
  }

  const double lr = config.learning_rate;
  std::vector<double> grad_h(dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = shuffled_indices(
        examples.size(), derive_seed(config.seed, "epoch" + std::to_string(epoch)));
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const Example& ex = examples[idx];
      auto h = lm.context_vector(ex.context);
      auto probs = lm.logits(h);
      epoch_loss -= log_softmax_at(probs, ex.target);
      probs[ex.target] -= 1.0;  // dL/dlogits

      std::fill(grad_h.begin(), grad_h.end(), 0.0);
      for (std::size_t k = 0; k < dim; ++k) {
        double* row = &lm.output_[k * vocab];
        double acc = 0.0;
        const double hk = h[k];
        for (std::size_t v = 0; v < vocab; ++v) {
          acc += row[v] * probs[v];
          row[v] -= lr * hk * probs[v];
        }
        grad_h[k] = acc;
      }
      for (std::size_t v = 0; v < vocab; ++v) lm.output_bias_[v] -= lr * probs[v];
      const double share = lr / static_cast<double>(ex.context.size());
      for (std::size_t id : ex.context) {
        double* row = &lm.embeddings_[id * dim];
        for (std::size_t k = 0; k < dim; ++k) row[k] -= share * grad_h[k];
      }
    }
    lm.epoch_losses_.push_back(epoch_loss / static_cast<double>(examples.size()));
  }
  return lm;
}

nlohmann::ordered_json NgramLm::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n_;
  j["dim"] = dim_;
  j["seed"] = seed_;
  j["vocab"] = vocab_;
  j["embeddings"] = embeddings_;
  j["output"] = output_;
  j["output_bias"] = output_bias_;
  j["epoch_losses"] = epoch_losses_;
  return j;
}

NgramLm NgramLm::FromJson(const nlohmann::json& j) {
  NgramLm lm;
  try {
    lm.n_ = j.at("n").get<int>();
    lm.dim_ = j.at("dim").get<int>();
    lm.seed_ = j.at("seed").get<std::uint64_t>();
    lm.vocab_ = j.at("vocab").get<std::vector<std::string>>();
    lm.embeddings_ = j.at("embeddings").get<std::vector<double>>();
    lm.output_ = j.at("output").get<std::vector<double>>();
    lm.output_bias_ = j.at("output_bias").get<std::vector<double>>();
    lm.epoch_losses_ = j.value("epoch_losses", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad n-gram model: ") + e.what());
  }
  const std::size_t cells = lm.vocab_.size() * static_cast<std::size_t>(lm.dim_);
  if (lm.dim_ <= 0 || lm.embeddings_.size() != cells ||
      lm.output_.size() != cells || lm.output_bias_.size() != lm.vocab_.size()) {
    throw FormatError("n-gram model matrices do not match vocab and dim");
  }
  for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.index_[lm.vocab_[i]] = i;
  if (!lm.index_.contains(std::string(kUnk)) ||
      !lm.index_.contains(std::string(kBos))) {
    throw FormatError("n-gram model vocab lacks <unk> or <s>");
  }
  return lm;
}

std::vector<double> FeatureVector::hashed_dense(std::size_t buckets) const {
  std::vector<double> out(buckets, 0.0);
  for (const auto& [index, count] : hashed) {
    if (index < buckets) out[index] = count;
  }
  return out;
}

std::uint64_t hash_ngram(std::span<const std::string> gram) {
  std::uint64_t h = fnv1a64("");
  for (std::size_t i = 0; i < gram.size(); ++i) {
    if (i > 0) h = fnv1a64("\x1f", h);
    h = fnv1a64(gram[i], h);
  }
  return h;
}

FeatureVector featurize(const NgramLm& lm, std::span<const std::string> tokens,
                        std::size_t buckets) {
  if (tokens.empty()) throw InvalidArgument("cannot featurize an empty input");
  if (buckets == 0) throw InvalidArgument("hash buckets must be > 0");
  FeatureVector f;
  f.dense.assign(lm.dim(), 0.0);
  for (const auto& t : tokens) {
    auto row = lm.embedding(t);
    for (int k = 0; k < lm.dim(); ++k) f.dense[k] += row[k];
  }
  for (double& v : f.dense) v /= static_cast<double>(tokens.size());

  std::map<std::uint32_t, double> counts;
  for (int order = 1; order <= lm.n(); ++order) {
    const auto width = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
      auto bucket =
          static_cast<std::uint32_t>(hash_ngram(tokens.subspan(i, width)) % buckets);
      counts[bucket] += 1.0;
    }
  }
  f.hashed.assign(counts.begin(), counts.end());
  return f;
}

}  // namespace kgcd
