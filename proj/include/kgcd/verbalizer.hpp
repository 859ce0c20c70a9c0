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

// Rendering of metapath subgraphs as prompt text and as ranker input.

#ifndef KGCD_VERBALIZER_HPP_
#define KGCD_VERBALIZER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgcd/kg_store.hpp"

namespace kgcd {

inline constexpr std::string_view kDefaultPathPrefix =
    "Relation paths between the pair: ";

// kFull:        "(t1 v1, e1, t2 v2), (t2 v2, e2, t3 v3)"
// kTypedArrows: "v1 -e1→ v2 -e2→ v3"   (relation-labelled arrows)
// kPlainArrows: "v1 → v2 → v3"
// kHyphen:      "v1 - v2 - v3"          (direction dropped)
enum class StyleVariant { kFull, kTypedArrows, kPlainArrows, kHyphen };

StyleVariant parse_style_variant(std::string_view name);
std::string_view to_string(StyleVariant variant);

struct VerbalizationStyle {
  StyleVariant variant = StyleVariant::kFull;
  std::string arrow_token = "→";
  std::string reverse_arrow_token = "←";
  // Only the kFull rendering is prefixed.
  std::optional<std::string> prefix = std::string(kDefaultPathPrefix);

  static VerbalizationStyle Of(StyleVariant variant) {
    VerbalizationStyle style;
    style.variant = variant;
    return style;
  }
};

std::string verbalize(const MetapathSubgraph& subgraph,
                      const VerbalizationStyle& style);

// "CLS a b SEP t1 v1 - t2 v2 - ... - tn vn". A node without a type takes
// the label of the edge that reaches it (the first node gets none) when
// include_types is set.
std::string encode_ranker_input(std::string_view a, std::string_view b,
                                const MetapathSubgraph& subgraph,
                                bool include_types);

inline constexpr std::string_view kClsToken = "CLS";
inline constexpr std::string_view kSepToken = "SEP";

// Lowercased whitespace tokens; CLS and SEP keep their case.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace kgcd

#endif  // KGCD_VERBALIZER_HPP_
