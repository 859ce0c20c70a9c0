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

#include "kgcd/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kgcd/error.hpp"
#include "kgcd/random.hpp"
#include "kgcd/text.hpp"

namespace kgcd {

std::string_view to_string(Label label) {
  return label == Label::kCausal ? "causal" : "non-causal";
}

Label parse_label(std::string_view text) {
  std::string t = ascii_lower(trim(text));
  if (t == "causal" || t == "1") return Label::kCausal;
  if (t == "non-causal" || t == "noncausal" || t == "non causal" || t == "0") {
    return Label::kNonCausal;
  }
  throw FormatError("unknown label '" + std::string(text) + "'");
}

Completion Backend::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw InvalidArgument("empty prompt");
  if (request.max_tokens <= 0) throw InvalidArgument("max_tokens must be > 0");
  if (request.temperature < 0) throw InvalidArgument("negative temperature");
  ++calls_;
  return do_complete(request);
}

void MockOracleConfig::validate() const {
  if (causal_motifs.empty()) throw ConfigError("mock oracle needs motifs");
  for (const auto& m : causal_motifs) {
    if (m.empty()) throw ConfigError("empty mock oracle motif");
  }
  if (!(base_confidence > 0.5 && base_confidence <= 1.0)) {
    throw ConfigError("base_confidence must be in (0.5, 1]");
  }
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) {
    throw ConfigError("flip_rate must be in [0, 0.5)");
  }
}

nlohmann::ordered_json MockOracleConfig::to_json() const {
  nlohmann::ordered_json j;
  j["causal_motifs"] = causal_motifs;
  j["base_confidence"] = base_confidence;
  j["noise_seed"] = noise_seed;
  j["flip_rate"] = flip_rate;
  return j;
}

MockOracleConfig MockOracleConfig::FromJson(const nlohmann::json& j) {
  MockOracleConfig c;
  try {
    c.causal_motifs =
        j.at("causal_motifs").get<std::vector<std::vector<std::string>>>();
    c.base_confidence = j.value("base_confidence", c.base_confidence);
    c.noise_seed = j.value("noise_seed", c.noise_seed);
    c.flip_rate = j.value("flip_rate", c.flip_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad mock oracle config: ") + e.what());
  }
  c.validate();
  return c;
}

MockOracleConfig MockOracleConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock config '" + path.string() + "'");
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("mock config '" + path.string() + "': " + e.what());
  }
}

namespace {

bool is_separator_word(std::string_view w) {
  if (w == "-" || w == "→" || w == "←") return true;
  if (w.size() < 2) return false;
  auto ends_with = [&](std::string_view s) {
    return w.size() > s.size() && w.substr(w.size() - s.size()) == s;
  };
  if (w.front() == '-' && ends_with("→")) return true;
  if (w.starts_with("←") && w.back() == '-') return true;
  return false;
}

std::string leading_word(std::string_view element) {
  auto words = split_whitespace(element);
  return words.empty() ? std::string() : ascii_lower(words.front());
}

bool looks_full_style(std::string_view path) {
  auto open = path.find('(');
  return open != std::string_view::npos &&
         path.find(", ", open) != std::string_view::npos &&
         path.find(')', open) != std::string_view::npos;
}

}  // namespace

std::vector<std::string> path_type_sequence(std::string_view rendered_path) {
  std::vector<std::string> types;
  if (looks_full_style(rendered_path)) {
    std::size_t pos = 0;
    bool first = true;
    while ((pos = rendered_path.find('(', pos)) != std::string_view::npos) {
      auto close = rendered_path.find(')', pos);
      if (close == std::string_view::npos) break;
      auto parts = split(rendered_path.substr(pos + 1, close - pos - 1), ", ");
      if (parts.size() == 3) {
        if (first) types.push_back(leading_word(parts[0]));
        types.push_back(leading_word(parts[2]));
        first = false;
      }
      pos = close + 1;
    }
    return types;
  }
  std::string element;
  for (const auto& word : split_whitespace(rendered_path)) {
    if (is_separator_word(word)) {
      if (!element.empty()) types.push_back(leading_word(element));
      element.clear();
    } else {
      if (!element.empty()) element += ' ';
      element += word;
    }
  }
  if (!element.empty()) types.push_back(leading_word(element));
  return types;
}

std::vector<std::vector<std::string>> relation_block_type_sequences(
    std::string_view prompt) {
  constexpr std::string_view kMarker = "[Relation Paths]:";
  std::vector<std::vector<std::string>> out;
  auto at = prompt.rfind(kMarker);
  if (at == std::string_view::npos) return out;
  auto lines = split(prompt.substr(at + kMarker.size()), '\n');
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) {
      if (i == 0) continue;  // paths start on the next line
      break;
    }
    if (i > 0 && line.front() == '[') break;
    out.push_back(path_type_sequence(line));
  }
  return out;
}

MockBackend::MockBackend(MockOracleConfig config) : config_(std::move(config)) {
  config_.validate();
  for (auto& motif : config_.causal_motifs) {
    for (auto& t : motif) t = ascii_lower(t);
  }
}

bool MockBackend::matches_motif(
    const std::vector<std::vector<std::string>>& type_sequences) const {
  for (const auto& seq : type_sequences) {
    for (const auto& motif : config_.causal_motifs) {
      if (std::search(seq.begin(), seq.end(), motif.begin(), motif.end()) !=
          seq.end()) {
        return true;
      }
    }
  }
  return false;
}

namespace {

// Lines of the form "[i] path" in a ranking prompt, in order of appearance.
std::vector<std::pair<int, std::string>> numbered_lines(
    std::string_view prompt) {
  std::vector<std::pair<int, std::string>> out;
  for (const auto& raw : split(prompt, '\n')) {
    auto line = trim(raw);
    if (line.size() < 3 || line.front() != '[') continue;
    auto close = line.find(']');
    if (close == std::string_view::npos || close < 2) continue;
    auto digits = line.substr(1, close - 1);
    if (!std::all_of(digits.begin(), digits.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    out.emplace_back(std::stoi(std::string(digits)),
                     std::string(trim(line.substr(close + 1))));
  }
  return out;
}

}  // namespace

Completion MockBackend::do_complete(const CompletionRequest& request) {
  const double logprob = std::log(config_.base_confidence);
  Completion c;
  c.backend_id = id();

  if (request.prompt.find("Rank the") != std::string::npos) {
    auto items = numbered_lines(request.prompt);
    if (!items.empty()) {
      std::stable_partition(items.begin(), items.end(), [&](const auto& item) {
        return matches_motif({path_type_sequence(item.second)});
      });
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) c.text += " > ";
        c.text += "[" + std::to_string(items[i].first) + "]";
      }
      if (request.want_logprobs) c.tokens.push_back({c.text, logprob});
      return c;
    }
  }

  bool causal = matches_motif(relation_block_type_sequences(request.prompt));
  std::uint64_t h = mix64(fnv1a64(request.prompt) ^ config_.noise_seed);
  if (static_cast<double>(h >> 11) * 0x1.0p-53 < config_.flip_rate) {
    causal = !causal;
  }
  if (causal) {
    c.text = "causal";
    if (request.want_logprobs) c.tokens.push_back({"causal", logprob});
  } else {
    c.text = "non-causal";
    if (request.want_logprobs) {
      c.tokens.push_back({"non", logprob});
      c.tokens.push_back({"-causal", logprob});
    }
  }
  return c;
}

LabelProbability label_probability(const Completion& completion,
                                   const LabelVariants& variants) {
  if (completion.tokens.empty()) {
    throw CapabilityMissing("completion carries no token log-probabilities");
  }
  std::string surface;
  std::vector<std::size_t> starts;
  if (completion.token_text_available) {
    for (const auto& t : completion.tokens) {
      starts.push_back(surface.size());
      surface += t.token;
    }
  } else {
    surface = completion.text;
  }
  const std::string lowered = ascii_lower(surface);

  std::size_t best_pos = std::string::npos;
  std::size_t best_len = 0;
  Label best_label = Label::kCausal;
  auto scan = [&](const std::vector<std::string>& spellings, Label label) {
    for (const auto& v : spellings) {
      auto pos = lowered.find(ascii_lower(v));
      if (pos != std::string::npos && (best_pos == std::string::npos ||
                                       pos < best_pos)) {
        best_pos = pos;
        best_len = v.size();
        best_label = label;
      }
    }
  };
  scan(variants.non_causal, Label::kNonCausal);
  scan(variants.causal, Label::kCausal);
  if (best_pos == std::string::npos) {
    throw UnparseableLabel("no label in completion '" + completion.text + "'");
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < completion.tokens.size(); ++i) {
    if (completion.token_text_available) {
      std::size_t begin = starts[i];
      std::size_t end = begin + completion.tokens[i].token.size();
      if (end <= best_pos || begin >= best_pos + best_len) continue;
    }
    sum += completion.tokens[i].logprob;
    ++count;
  }
  LabelProbability out;
  out.label = best_label;
  out.mean_logprob = count > 0 ? std::min(0.0, sum / count) : 0.0;
  out.p = std::clamp(std::exp(out.mean_logprob), 0.0, 1.0);
  return out;
}

}  // namespace kgcd
