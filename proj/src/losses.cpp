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

#include "kgcd/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kgcd/error.hpp"

namespace kgcd {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "rmse") return LossKind::kRmse;
  if (name == "ranknet") return LossKind::kRankNet;
  if (name == "listnet") return LossKind::kListNet;
  throw InvalidArgument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kRmse:
      return "rmse";
    case LossKind::kRankNet:
      return "ranknet";
    case LossKind::kListNet:
      return "listnet";
  }
  return "rmse";
}

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a == 0) throw InvalidArgument("loss over an empty list");
  if (a != b) {
    throw InvalidArgument("length mismatch: " + std::to_string(a) + " scores, " +
                          std::to_string(b) + " targets");
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

LossValue loss_rmse(std::span<const double> scores,
                    std::span<const double> targets) {
  check_lengths(scores.size(), targets.size());
  const double n = static_cast<double>(scores.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - targets[i];
    sq += d * d;
  }
  LossValue out;
  out.value = std::sqrt(sq / n);
  out.grad.assign(scores.size(), 0.0);
  if (out.value > 0.0) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out.grad[i] = (scores[i] - targets[i]) / (n * out.value);
    }
  }
  return out;
}

LossValue loss_ranknet(std::span<const double> scores,
                       std::span<const int> ranks) {
  check_lengths(scores.size(), ranks.size());
  const std::size_t k = ranks.size();
  std::vector<bool> seen(k + 1, false);
  for (int r : ranks) {
    if (r < 1 || static_cast<std::size_t>(r) > k || seen[r]) {
      throw InvalidArgument("ranks must be a permutation of 1..k");
    }
    seen[r] = true;
  }
  LossValue out;
  out.grad.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (ranks[i] >= ranks[j]) continue;
      const double diff = scores[i] - scores[j];
      out.value += softplus(-diff);
      const double g = sigmoid(-diff);
      out.grad[i] -= g;
      out.grad[j] += g;
      ++out.pairs;
    }
  }
  return out;
}

LossValue loss_listnet(std::span<const double> scores,
                       std::span<const double> targets) {
  check_lengths(scores.size(), targets.size());
  auto target_probs = softmax(targets);
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  const double log_z = m + std::log(sum);
  LossValue out;
  out.grad.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double log_p = scores[i] - log_z;
    out.value -= target_probs[i] * log_p;
    out.grad[i] = std::exp(log_p) - target_probs[i];
  }
  return out;
}

}  // namespace kgcd
