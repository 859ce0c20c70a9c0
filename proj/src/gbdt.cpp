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

#include "kgcd/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgcd/error.hpp"

namespace kgcd {

double RegressionTree::predict(std::span<const double> row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const Node& n = nodes[at];
    at = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[at].value;
}

double GbdtModel::predict(std::span<const double> row) const {
  if (row.size() != num_features) {
    throw InvalidArgument("feature row has " + std::to_string(row.size()) +
                          " entries, model expects " +
                          std::to_string(num_features));
  }
  double f = base_score;
  for (const auto& t : trees) f += learning_rate * t.predict(row);
  return f;
}

namespace {

constexpr double kMinGain = 1e-12;

struct SplitCandidate {
  double gain = kMinGain;
  int feature = -1;
  double threshold = 0.0;
};

// Grows one tree level by level. Every sample starts in the root; node_of
// tracks the leaf that currently holds each sample.
class TreeGrower {
 public:
  TreeGrower(std::span<const double> rows, std::size_t num_features,
             const std::vector<std::vector<std::size_t>>& sorted_by_feature,
             const std::vector<int>& usable_features, const GbdtConfig& config)
      : rows_(rows),
        num_features_(num_features),
        sorted_(sorted_by_feature),
        usable_(usable_features),
        config_(config) {}

  RegressionTree grow(std::span<const double> residuals,
                      std::vector<int>& node_of) {
    const std::size_t n = residuals.size();
    RegressionTree tree;
    tree.nodes.emplace_back();
    node_of.assign(n, 0);
    std::vector<int> frontier{0};

    for (int depth = 0; depth < config_.max_depth && !frontier.empty(); ++depth) {
      const std::size_t nodes = tree.nodes.size();
      std::vector<double> total_sum(nodes, 0.0);
      std::vector<std::size_t> total_count(nodes, 0);
      for (std::size_t i = 0; i < n; ++i) {
        total_sum[node_of[i]] += residuals[i];
        ++total_count[node_of[i]];
      }
      std::vector<bool> active(nodes, false);
      for (int v : frontier) active[v] = true;

      std::vector<SplitCandidate> best(nodes);
      std::vector<double> left_sum(nodes);
      std::vector<std::size_t> left_count(nodes);
      std::vector<double> last_value(nodes);
      for (int f : usable_) {
        std::fill(left_sum.begin(), left_sum.end(), 0.0);
        std::fill(left_count.begin(), left_count.end(), 0);
        for (std::size_t i : sorted_[f]) {
          const int v = node_of[i];
          if (!active[v]) continue;
          const double x = rows_[i * num_features_ + f];
          if (left_count[v] >= config_.min_samples_leaf && x != last_value[v] &&
              total_count[v] - left_count[v] >= config_.min_samples_leaf) {
            const double sl = left_sum[v];
            const double sr = total_sum[v] - sl;
            const double nl = static_cast<double>(left_count[v]);
            const double nr = static_cast<double>(total_count[v] - left_count[v]);
            const double gain = sl * sl / nl + sr * sr / nr -
                                total_sum[v] * total_sum[v] /
                                    static_cast<double>(total_count[v]);
            if (gain > best[v].gain) {
              best[v] = {gain, f, last_value[v] + (x - last_value[v]) / 2.0};
            }
          }
          left_sum[v] += residuals[i];
          ++left_count[v];
          last_value[v] = x;
        }
      }

      std::vector<int> next;
      for (int v : frontier) {
        if (best[v].feature < 0) continue;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[v].feature = best[v].feature;
        tree.nodes[v].threshold = best[v].threshold;
        tree.nodes[v].left = left;
        tree.nodes[v].right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[node_of[i]];
        if (node.feature < 0 || !active[node_of[i]]) continue;
        node_of[i] = rows_[i * num_features_ + node.feature] <= node.threshold
                         ? node.left
                         : node.right;
      }
      frontier = std::move(next);
    }

    std::vector<double> sum(tree.nodes.size(), 0.0);
    std::vector<std::size_t> count(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[node_of[i]] += residuals[i];
      ++count[node_of[i]];
    }
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
      if (tree.nodes[v].feature < 0 && count[v] > 0) {
        tree.nodes[v].value = sum[v] / static_cast<double>(count[v]);
      }
    }
    return tree;
  }

 private:
  std::span<const double> rows_;
  std::size_t num_features_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  const std::vector<int>& usable_;
  const GbdtConfig& config_;
};

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  double sq = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(targets.size()));
}

}  // namespace

GbdtModel train_gbdt(std::span<const double> rows, std::size_t num_features,
                     std::span<const double> targets, const GbdtConfig& config) {
  const std::size_t n = targets.size();
  if (n == 0) throw InvalidArgument("no training rows");
  if (rows.size() != n * num_features) {
    throw InvalidArgument("feature matrix does not match target count");
  }
  if (config.rounds < 1 || config.max_depth < 0 || config.learning_rate <= 0 ||
      config.min_samples_leaf == 0) {
    throw InvalidArgument("bad boosting configuration");
  }

  std::vector<std::vector<std::size_t>> sorted(num_features);
  std::vector<int> usable;
  for (std::size_t f = 0; f < num_features; ++f) {
    auto& order = sorted[f];
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rows[a * num_features + f] < rows[b * num_features + f];
    });
    if (rows[order.front() * num_features + f] !=
        rows[order.back() * num_features + f]) {
      usable.push_back(static_cast<int>(f));
    }
  }

  GbdtModel model;
  model.num_features = num_features;
  model.learning_rate = config.learning_rate;
  model.base_score =
      std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);
  std::vector<double> prediction(n, model.base_score);
  model.training_rmse.push_back(rmse(prediction, targets));

  TreeGrower grower(rows, num_features, sorted, usable, config);
  std::vector<double> residuals(n);
  std::vector<int> leaf_of;
  for (int round = 0; round < config.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = targets[i] - prediction[i];
    RegressionTree tree = grower.grow(residuals, leaf_of);
    std::vector<double> stepped = prediction;
    for (std::size_t i = 0; i < n; ++i) {
      stepped[i] += config.learning_rate * tree.nodes[leaf_of[i]].value;
    }
    // A least-squares step cannot raise the error in exact arithmetic; when
    // rounding makes it do so, the round becomes a no-op.
    const double stepped_rmse = rmse(stepped, targets);
    if (stepped_rmse > model.training_rmse.back()) {
      for (auto& node : tree.nodes) node.value = 0.0;
    } else {
      prediction = std::move(stepped);
    }
    model.trees.push_back(std::move(tree));
    model.training_rmse.push_back(rmse(prediction, targets));
  }
  return model;
}

nlohmann::ordered_json GbdtModel::to_json() const {
  nlohmann::ordered_json j;
  j["num_features"] = num_features;
  j["base_score"] = base_score;
  j["learning_rate"] = learning_rate;
  auto trees_json = nlohmann::ordered_json::array();
  for (const auto& t : trees) {
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    }
    trees_json.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees_json);
  j["training_rmse"] = training_rmse;
  return j;
}

GbdtModel GbdtModel::FromJson(const nlohmann::json& j) {
  GbdtModel m;
  try {
    m.num_features = j.at("num_features").get<std::size_t>();
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& n : t) {
        RegressionTree::Node node;
        node.feature = n.at(0).get<int>();
        node.threshold = n.at(1).get<double>();
        node.left = n.at(2).get<int>();
        node.right = n.at(3).get<int>();
        node.value = n.at(4).get<double>();
        tree.nodes.push_back(node);
      }
      if (tree.nodes.empty()) throw FormatError("empty regression tree");
      const int count = static_cast<int>(tree.nodes.size());
      for (int i = 0; i < count; ++i) {
        const auto& node = tree.nodes[i];
        if (node.feature < 0) continue;
        // Children come after their parent, which also rules out cycles.
        if (static_cast<std::size_t>(node.feature) >= m.num_features ||
            node.left <= i || node.left >= count || node.right <= i ||
            node.right >= count) {
          throw FormatError("regression tree node " + std::to_string(i) +
                            " has bad links");
        }
      }
      m.trees.push_back(std::move(tree));
    }
    m.training_rmse = j.value("training_rmse", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad boosted-trees model: ") + e.what());
  }
  return m;
}

}  // namespace kgcd
