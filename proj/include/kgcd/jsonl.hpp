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


#ifndef KGCD_JSONL_HPP_
#define KGCD_JSONL_HPP_

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgcd/error.hpp"
#include "kgcd/text.hpp"

namespace kgcd {

// Parses one JSON document per non-blank line. Parse failures become
// LoadError with the 1-based line number.
template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path.string() + ": " + e.what(), lineno);
    } catch (const FormatError& e) {
      throw LoadError(path.string() + ": " + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace kgcd

#endif  // KGCD_JSONL_HPP_
