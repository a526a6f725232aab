// Copyright 2026 The bngp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef BNGP_CONFIG_HPP_
#define BNGP_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bngp/common.hpp"

namespace bngp {

// Flat typed key-value document with dotted section names:
//   defender.kind = bngp
//   seeds = 1,2,3
// '#' starts a comment. Keys not consumed by a reader are errors (typo
// protection) via fail_on_unknown().
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback)
      const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& fallback) const;
  std::vector<std::uint64_t> get_uint_list(
      const std::string& key,
      const std::vector<std::uint64_t>& fallback) const;

  // ParseError naming every key that no reader consumed.
  void fail_on_unknown() const;

  const std::string& text() const { return text_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
  std::string text_;
};

}  // namespace bngp

#endif  // BNGP_CONFIG_HPP_
