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

#include "kgcd/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kgcd/error.hpp"
#include "kgcd/metrics.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"
#include "kgcd/verbalizer.hpp"

namespace kgcd {

RankerKind parse_ranker_kind(std::string_view name) {
  if (name == "neural") return RankerKind::kNeural;
  if (name == "gbdt") return RankerKind::kGbdt;
  if (name == "similarity") return RankerKind::kSimilarity;
  if (name == "random") return RankerKind::kRandom;
  throw InvalidArgument("unknown ranker kind '" + std::string(name) + "'");
}

std::string_view to_string(RankerKind kind) {
  switch (kind) {
    case RankerKind::kNeural:
      return "neural";
    case RankerKind::kGbdt:
      return "gbdt";
    case RankerKind::kSimilarity:
      return "similarity";
    case RankerKind::kRandom:
      return "random";
  }
  return "random";
}

NeuralScorer NeuralScorer::Init(std::size_t input_dim, std::size_t hidden,
                                std::uint64_t seed) {
  if (input_dim == 0 || hidden == 0) {
    throw InvalidArgument("neural scorer needs positive dimensions");
  }
  NeuralScorer m;
  m.input_dim = input_dim;
  m.hidden = hidden;
  Engine rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  m.w1.resize(input_dim * hidden);
  for (double& w : m.w1) w = uniform(rng, -r1, r1);
  m.b1.assign(hidden, 0.0);
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  m.w2.resize(hidden);
  for (double& w : m.w2) w = uniform(rng, -r2, r2);
  m.feature_mean.assign(input_dim, 0.0);
  m.feature_scale.assign(input_dim, 1.0);
  return m;
}

namespace {

struct Activations {
  std::vector<double> z;  // standardized input
  std::vector<double> h;  // tanh hidden layer
  double s = 0.0;
};

Activations forward(const NeuralScorer& m, std::span<const double> x) {
  if (x.size() != m.input_dim) {
    throw InvalidArgument("feature vector has " + std::to_string(x.size()) +
                          " entries, scorer expects " +
                          std::to_string(m.input_dim));
  }
  Activations a;
  a.z.resize(m.input_dim);
  for (std::size_t i = 0; i < m.input_dim; ++i) {
    a.z[i] = (x[i] - m.feature_mean[i]) * m.feature_scale[i];
  }
  a.h = m.b1;
  for (std::size_t i = 0; i < m.input_dim; ++i) {
    const double zi = a.z[i];
    const double* row = &m.w1[i * m.hidden];
    for (std::size_t j = 0; j < m.hidden; ++j) a.h[j] += zi * row[j];
  }
  a.s = m.b2;
  for (std::size_t j = 0; j < m.hidden; ++j) {
    a.h[j] = std::tanh(a.h[j]);
    a.s += m.w2[j] * a.h[j];
  }
  return a;
}

}  // namespace

double NeuralScorer::score(std::span<const double> features) const {
  return forward(*this, features).s;
}

double NeuralScorer::list_loss(std::span<const std::vector<double>> items,
                               LossKind loss, std::span<const double> targets,
                               std::span<const int> ranks,
                               std::vector<double>* gradient) const {
  std::vector<Activations> acts;
  std::vector<double> scores;
  acts.reserve(items.size());
  for (const auto& x : items) {
    acts.push_back(forward(*this, x));
    scores.push_back(acts.back().s);
  }
  LossValue lv;
  switch (loss) {
    case LossKind::kRmse:
      lv = loss_rmse(scores, targets);
      break;
    case LossKind::kRankNet:
      lv = loss_ranknet(scores, ranks);
      break;
    case LossKind::kListNet:
      lv = loss_listnet(scores, targets);
      break;
  }
  if (gradient == nullptr) return lv.value;

  gradient->assign(parameter_count(), 0.0);
  double* g_w1 = gradient->data();
  double* g_b1 = g_w1 + input_dim * hidden;
  double* g_w2 = g_b1 + hidden;
  double* g_b2 = g_w2 + hidden;
  std::vector<double> da(hidden);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double g = lv.grad[k];
    if (g == 0.0) continue;
    const auto& a = acts[k];
    *g_b2 += g;
    for (std::size_t j = 0; j < hidden; ++j) {
      g_w2[j] += g * a.h[j];
      da[j] = g * w2[j] * (1.0 - a.h[j] * a.h[j]);
      g_b1[j] += da[j];
    }
    for (std::size_t i = 0; i < input_dim; ++i) {
      const double zi = a.z[i];
      double* row = g_w1 + i * hidden;
      for (std::size_t j = 0; j < hidden; ++j) row[j] += zi * da[j];
    }
  }
  return lv.value;
}

std::vector<double> NeuralScorer::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

void NeuralScorer::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw InvalidArgument("parameter vector has the wrong length");
  }
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

namespace {

std::vector<std::string> ranker_tokens(std::string_view a, std::string_view b,
                                       const MetapathSubgraph& sg,
                                       bool include_types) {
  return tokenize(encode_ranker_input(a, b, sg, include_types));
}

double cosine(std::span<const double> x, std::span<const double> y) {
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot / std::sqrt(nx * ny);
}

const NgramLm& require_lm(const RankerModel& m) {
  if (!m.lm) {
    throw InvalidArgument(std::string(to_string(m.kind)) +
                          " ranker has no n-gram model");
  }
  return *m.lm;
}

}  // namespace

double RankerModel::score(std::string_view a, std::string_view b,
                          const MetapathSubgraph& subgraph) const {
  switch (kind) {
    case RankerKind::kRandom: {
      std::uint64_t h = fnv1a64(a);
      h = fnv1a64("\x1f", h);
      h = fnv1a64(b, h);
      for (const auto& id : subgraph.node_ids) h = fnv1a64(id, fnv1a64("\x1f", h));
      for (const auto& e : subgraph.edge_labels) h = fnv1a64(e, fnv1a64("\x1e", h));
      return static_cast<double>(mix64(h ^ seed) >> 11) * 0x1.0p-53;
    }
    case RankerKind::kSimilarity: {
      const NgramLm& m = require_lm(*this);
      std::string pair_text = std::string(a) + " " + std::string(b);
      auto pair_f = featurize(m, tokenize(pair_text), features.hash_buckets);
      auto path_f = featurize(m, tokenize(join(subgraph.node_names, " ")),
                              features.hash_buckets);
      return cosine(pair_f.dense, path_f.dense);
    }
    case RankerKind::kNeural: {
      if (!neural) throw InvalidArgument("neural ranker has no weights");
      auto f = featurize(require_lm(*this),
                         ranker_tokens(a, b, subgraph, features.include_types),
                         features.hash_buckets);
      return neural->score(f.dense);
    }
    case RankerKind::kGbdt: {
      if (!gbdt) throw InvalidArgument("gbdt ranker has no trees");
      auto f = featurize(require_lm(*this),
                         ranker_tokens(a, b, subgraph, features.include_types),
                         features.hash_buckets);
      return gbdt->predict(f.hashed_dense(features.hash_buckets));
    }
  }
  return 0.0;
}

std::vector<TokenSequence> build_ranker_corpus(
    std::span<const RankedPairRecord> dataset, bool include_types) {
  std::vector<TokenSequence> corpus;
  for (const auto& r : dataset) {
    for (const auto& m : r.metapaths) {
      corpus.push_back(
          ranker_tokens(r.e1, r.e2, subgraph_from_entry(m), include_types));
    }
  }
  return corpus;
}

RankingQuery make_query(const RankedPairRecord& record, const NgramLm& lm,
                        const FeatureConfig& features) {
  RankingQuery q;
  for (std::size_t i = 0; i < record.metapaths.size(); ++i) {
    const auto& m = record.metapaths[i];
    q.items.push_back(featurize(
        lm,
        ranker_tokens(record.e1, record.e2, subgraph_from_entry(m),
                      features.include_types),
        features.hash_buckets));
    q.targets.push_back(m.relscore);
    q.ranks.push_back(static_cast<int>(i + 1));
    q.relevant.push_back(m.relevant);
  }
  return q;
}

namespace {

struct Adam {
  explicit Adam(std::size_t n, double lr) : m(n, 0.0), v(n, 0.0), step_size(lr) {}

  void step(std::vector<double>& params, std::span<const double> grad) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1 - kBeta2) * grad[i] * grad[i];
      params[i] -= step_size * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }

  std::vector<double> m, v;
  double step_size;
  int t = 0;
};

struct DenseQuery {
  std::vector<std::vector<double>> items;
  std::vector<double> targets;
  std::vector<int> ranks;
};

}  // namespace

RankerModel train_neural_ranker(std::span<const RankedPairRecord> dataset,
                                const NgramLm& lm, LossKind loss,
                                const TrainConfig& config,
                                const FeatureConfig& features) {
  if (config.epochs < 0 || config.batch == 0 || config.learning_rate <= 0 ||
      config.hidden == 0) {
    throw InvalidArgument("bad training configuration");
  }
  const std::size_t min_items = loss == LossKind::kRmse ? 1 : 2;
  RankerModel model;
  model.kind = RankerKind::kNeural;
  model.loss_kind = loss;
  model.features = features;
  model.seed = config.seed;
  model.lm = lm;

  std::vector<DenseQuery> queries;
  for (const auto& record : dataset) {
    if (record.metapaths.size() < min_items) {
      ++model.skipped_records;
      continue;
    }
    RankingQuery q = make_query(record, lm, features);
    DenseQuery d;
    for (auto& f : q.items) d.items.push_back(std::move(f.dense));
    d.targets = std::move(q.targets);
    d.ranks = std::move(q.ranks);
    queries.push_back(std::move(d));
  }
  if (queries.empty()) {
    throw InvalidArgument("no usable training records for " +
                          std::string(to_string(loss)));
  }

  const auto dim = static_cast<std::size_t>(lm.dim());
  NeuralScorer scorer =
      NeuralScorer::Init(dim, config.hidden, derive_seed(config.seed, "init"));
  std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
  std::size_t count = 0;
  for (const auto& q : queries) {
    for (const auto& x : q.items) {
      for (std::size_t i = 0; i < dim; ++i) {
        sum[i] += x[i];
        sq[i] += x[i] * x[i];
      }
      ++count;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const double mean = sum[i] / static_cast<double>(count);
    const double var = std::max(0.0, sq[i] / static_cast<double>(count) - mean * mean);
    scorer.feature_mean[i] = mean;
    scorer.feature_scale[i] = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
  }

  Adam adam(scorer.parameter_count(), config.learning_rate);
  std::vector<double> params = scorer.parameters();
  std::vector<double> batch_grad(params.size());
  std::vector<double> grad;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = shuffled_indices(
        queries.size(), derive_seed(config.seed, "epoch" + std::to_string(epoch)));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto& q = queries[order[b]];
        epoch_loss += scorer.list_loss(q.items, loss, q.targets, q.ranks, &grad);
        for (std::size_t i = 0; i < grad.size(); ++i) batch_grad[i] += grad[i];
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : batch_grad) g *= inv;
      adam.step(params, batch_grad);
      scorer.set_parameters(params);
    }
    epoch_loss /= static_cast<double>(queries.size());
    model.epoch_losses.push_back(epoch_loss);
    if (config.patience > 0) {
      if (epoch_loss < best - 1e-9) {
        best = epoch_loss;
        stale = 0;
      } else if (++stale >= config.patience) {
        break;
      }
    }
  }
  model.neural = std::move(scorer);
  return model;
}

RankerModel train_gbdt_ranker(std::span<const RankedPairRecord> dataset,
                              const NgramLm& lm, const TrainConfig& config,
                              const FeatureConfig& features) {
  RankerModel model;
  model.kind = RankerKind::kGbdt;
  model.loss_kind = LossKind::kRmse;
  model.features = features;
  model.seed = config.seed;
  model.lm = lm;

  std::vector<double> rows;
  std::vector<double> targets;
  for (const auto& record : dataset) {
    if (record.metapaths.empty()) {
      ++model.skipped_records;
      continue;
    }
    RankingQuery q = make_query(record, lm, features);
    for (std::size_t i = 0; i < q.items.size(); ++i) {
      auto row = q.items[i].hashed_dense(features.hash_buckets);
      rows.insert(rows.end(), row.begin(), row.end());
      targets.push_back(q.targets[i]);
    }
  }
  if (targets.empty()) throw InvalidArgument("no usable training records for gbdt");
  model.gbdt = train_gbdt(rows, features.hash_buckets, targets, config.gbdt);
  model.epoch_losses = model.gbdt->training_rmse;
  return model;
}

RankerModel make_similarity_ranker(NgramLm lm) {
  RankerModel model;
  model.kind = RankerKind::kSimilarity;
  model.lm = std::move(lm);
  return model;
}

RankerModel make_random_ranker(std::uint64_t seed) {
  RankerModel model;
  model.kind = RankerKind::kRandom;
  model.seed = seed;
  return model;
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return scores[x] > scores[y];
  });
  return order;
}

std::vector<ScoredSubgraph> rank_subgraphs(
    const RankerModel& model, std::string_view a, std::string_view b,
    std::span<const MetapathSubgraph> subgraphs) {
  std::vector<double> scores;
  scores.reserve(subgraphs.size());
  for (const auto& sg : subgraphs) scores.push_back(model.score(a, b, sg));
  std::vector<ScoredSubgraph> out;
  for (std::size_t i : descending_order(scores)) {
    out.push_back({subgraphs[i], scores[i]});
  }
  return out;
}

nlohmann::ordered_json RankingMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["queries"] = queries;
  for (const auto& [k, v] : ndcg) j["ndcg@" + std::to_string(k)] = v;
  for (const auto& [k, v] : recall) j["recall@" + std::to_string(k)] = v;
  return j;
}

RankingMetrics evaluate_ranking(const RankerModel& model,
                                std::span<const RankedPairRecord> dataset,
                                std::span<const std::size_t> ks) {
  RankingMetrics out;
  for (std::size_t k : ks) {
    out.ndcg[k] = 0.0;
    out.recall[k] = 0.0;
  }
  for (const auto& record : dataset) {
    if (record.metapaths.empty()) continue;
    std::vector<double> scores;
    for (const auto& m : record.metapaths) {
      scores.push_back(model.score(record.e1, record.e2, subgraph_from_entry(m)));
    }
    std::vector<double> gains;
    std::vector<bool> relevant;
    std::size_t total_relevant = 0;
    for (std::size_t i : descending_order(scores)) {
      gains.push_back(record.metapaths[i].relscore);
      relevant.push_back(record.metapaths[i].relevant);
      total_relevant += record.metapaths[i].relevant ? 1 : 0;
    }
    for (std::size_t k : ks) {
      out.ndcg[k] += ndcg_at_k(gains, k);
      out.recall[k] += recall_at_k(relevant, k, total_relevant);
    }
    ++out.queries;
  }
  if (out.queries > 0) {
    const double n = static_cast<double>(out.queries);
    for (auto& [k, v] : out.ndcg) v /= n;
    for (auto& [k, v] : out.recall) v /= n;
  }
  return out;
}

nlohmann::ordered_json RankerModel::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = "v1";
  j["kind"] = std::string(to_string(kind));
  j["loss_kind"] = std::string(to_string(loss_kind));
  j["feature_config"] = {{"include_types", features.include_types},
                         {"hash_buckets", features.hash_buckets}};
  j["seed"] = seed;
  j["skipped_records"] = skipped_records;
  j["epoch_losses"] = epoch_losses;
  if (neural) {
    nlohmann::ordered_json n;
    n["input_dim"] = neural->input_dim;
    n["hidden"] = neural->hidden;
    n["activation"] = "tanh";
    n["w1"] = neural->w1;
    n["b1"] = neural->b1;
    n["w2"] = neural->w2;
    n["b2"] = neural->b2;
    n["feature_mean"] = neural->feature_mean;
    n["feature_scale"] = neural->feature_scale;
    j["neural"] = std::move(n);
  }
  if (gbdt) j["gbdt"] = gbdt->to_json();
  if (lm) j["ngram_lm"] = lm->to_json();
  return j;
}

RankerModel RankerModel::FromJson(const nlohmann::json& j) {
  RankerModel m;
  try {
    if (j.at("version") != "v1") throw FormatError("unsupported model version");
    m.kind = parse_ranker_kind(j.at("kind").get<std::string>());
    m.loss_kind = parse_loss_kind(j.at("loss_kind").get<std::string>());
    const auto& fc = j.at("feature_config");
    m.features.include_types = fc.at("include_types").get<bool>();
    m.features.hash_buckets = fc.at("hash_buckets").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.skipped_records = j.value("skipped_records", std::size_t{0});
    m.epoch_losses = j.value("epoch_losses", std::vector<double>{});
    if (j.contains("neural")) {
      const auto& n = j.at("neural");
      NeuralScorer s;
      s.input_dim = n.at("input_dim").get<std::size_t>();
      s.hidden = n.at("hidden").get<std::size_t>();
      s.w1 = n.at("w1").get<std::vector<double>>();
      s.b1 = n.at("b1").get<std::vector<double>>();
      s.w2 = n.at("w2").get<std::vector<double>>();
      s.b2 = n.at("b2").get<double>();
      s.feature_mean = n.at("feature_mean").get<std::vector<double>>();
      s.feature_scale = n.at("feature_scale").get<std::vector<double>>();
      if (s.w1.size() != s.input_dim * s.hidden || s.b1.size() != s.hidden ||
          s.w2.size() != s.hidden || s.feature_mean.size() != s.input_dim ||
          s.feature_scale.size() != s.input_dim) {
        throw FormatError("neural weights do not match declared shape");
      }
      m.neural = std::move(s);
    }
    if (j.contains("gbdt")) m.gbdt = GbdtModel::FromJson(j.at("gbdt"));
    if (j.contains("ngram_lm")) m.lm = NgramLm::FromJson(j.at("ngram_lm"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad ranker model: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad ranker model: ") + e.what());
  }
  return m;
}

}  // namespace kgcd
