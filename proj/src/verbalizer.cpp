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

#include "kgcd/verbalizer.hpp"

#include "kgcd/error.hpp"
#include "kgcd/text.hpp"

namespace kgcd {

StyleVariant parse_style_variant(std::string_view name) {
  if (name == "full") return StyleVariant::kFull;
  if (name == "typed_arrows") return StyleVariant::kTypedArrows;
  if (name == "plain_arrows") return StyleVariant::kPlainArrows;
  if (name == "hyphen") return StyleVariant::kHyphen;
  throw InvalidArgument("unknown verbalization style '" + std::string(name) +
                        "'");
}

std::string_view to_string(StyleVariant variant) {
  switch (variant) {
    case StyleVariant::kFull:
      return "full";
    case StyleVariant::kTypedArrows:
      return "typed_arrows";
    case StyleVariant::kPlainArrows:
      return "plain_arrows";
    case StyleVariant::kHyphen:
      return "hyphen";
  }
  return "full";
}

namespace {

std::string typed_node(const MetapathSubgraph& sg, std::size_t i) {
  if (sg.node_types[i].empty()) return sg.node_names[i];
  return sg.node_types[i] + " " + sg.node_names[i];
}

std::string render_full(const MetapathSubgraph& sg,
                        const VerbalizationStyle& style) {
  std::string out = style.prefix.value_or("");
  for (std::size_t i = 0; i + 1 < sg.node_names.size(); ++i) {
    if (i > 0) out += ", ";
    std::string relation = sg.edge_labels[i];
    if (sg.edge_directions[i] == EdgeDirection::kReverse) {
      relation = style.reverse_arrow_token + " " + relation;
    }
    out += "(" + typed_node(sg, i) + ", " + relation + ", " +
           typed_node(sg, i + 1) + ")";
  }
  return out;
}

std::string render_arrows(const MetapathSubgraph& sg,
                          const VerbalizationStyle& style, bool labelled) {
  if (style.arrow_token.empty() || style.reverse_arrow_token.empty()) {
    throw InvalidArgument("arrow styles need non-empty arrow tokens");
  }
  std::string out = sg.node_names[0];
  for (std::size_t i = 0; i + 1 < sg.node_names.size(); ++i) {
    bool forward = sg.edge_directions[i] == EdgeDirection::kForward;
    std::string arrow;
    if (!labelled) {
      arrow = forward ? style.arrow_token : style.reverse_arrow_token;
    } else if (forward) {
      arrow = "-" + sg.edge_labels[i] + style.arrow_token;
    } else {
      arrow = style.reverse_arrow_token + sg.edge_labels[i] + "-";
    }
    out += " " + arrow + " " + sg.node_names[i + 1];
  }
  return out;
}

}  // namespace

std::string verbalize(const MetapathSubgraph& subgraph,
                      const VerbalizationStyle& style) {
  switch (style.variant) {
    case StyleVariant::kFull:
      return render_full(subgraph, style);
    case StyleVariant::kTypedArrows:
      return render_arrows(subgraph, style, true);
    case StyleVariant::kPlainArrows:
      return render_arrows(subgraph, style, false);
    case StyleVariant::kHyphen:
      return join(subgraph.node_names, " - ");
  }
  return {};
}

std::string encode_ranker_input(std::string_view a, std::string_view b,
                                const MetapathSubgraph& subgraph,
                                bool include_types) {
  std::string out(kClsToken);
  out += " ";
  out += a;
  out += " ";
  out += b;
  out += " ";
  out += kSepToken;
  for (std::size_t i = 0; i < subgraph.node_names.size(); ++i) {
    out += i == 0 ? " " : " - ";
    if (include_types) {
      const std::string& type = subgraph.node_types[i];
      if (!type.empty()) {
        out += type + " ";
      } else if (i > 0) {
        out += subgraph.edge_labels[i - 1] + " ";
      }
    }
    out += subgraph.node_names[i];
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto tokens = split_whitespace(text);
  for (auto& t : tokens) {
    if (t != kClsToken && t != kSepToken) t = ascii_lower(t);
  }
  return tokens;
}

}  // namespace kgcd
