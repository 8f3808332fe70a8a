// Copyright 2026 The bootlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "site.hpp"

namespace bootlab {

// One element X of an update family: a finite set of offsets, none of them
// the origin. Offsets are kept sorted and unique.
class UpdateRule {
 public:
  UpdateRule() = default;

  explicit UpdateRule(std::vector<Site> offsets) : offsets_(std::move(offsets)) {
    std::sort(offsets_.begin(), offsets_.end());
    offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
    if (offsets_.empty()) throw InvalidArgument("update rule must be nonempty");
    if (std::binary_search(offsets_.begin(), offsets_.end(), Site{0, 0})) {
      throw InvalidArgument("update rule must not contain the origin");
    }
  }

  UpdateRule(std::initializer_list<Site> offsets)
      : UpdateRule(std::vector<Site>(offsets)) {}

  const std::vector<Site>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }

  friend auto operator<=>(const UpdateRule&, const UpdateRule&) = default;

 private:
  std::vector<Site> offsets_;
};

// A finite nonempty collection of update rules. A site x becomes infected
// once x + X is entirely infected for some rule X.
class UpdateFamily {
 public:
  UpdateFamily() = default;

  explicit UpdateFamily(std::vector<UpdateRule> rules, std::string name = {})
      : rules_(std::move(rules)), name_(std::move(name)) {
    if (rules_.empty()) throw InvalidArgument("update family needs at least one rule");
    std::sort(rules_.begin(), rules_.end());
    rules_.erase(std::unique(rules_.begin(), rules_.end()), rules_.end());
  }

  const std::vector<UpdateRule>& rules() const { return rules_; }
  const std::string& name() const { return name_; }

  // Union of all rule offsets, sorted.
  std::vector<Site> distinct_offsets() const {
    std::vector<Site> all;
    for (const auto& r : rules_) all.insert(all.end(), r.offsets().begin(), r.offsets().end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }

  // Largest |coordinate| over all offsets.
  std::int64_t reach() const {
    std::int64_t r = 0;
    for (const auto& rule : rules_) {
      for (const Site& s : rule.offsets()) {
        r = std::max({r, s.x < 0 ? -s.x : s.x, s.y < 0 ? -s.y : s.y});
      }
    }
    return r;
  }

  // Largest Chebyshev diameter of a rule together with the updated site.
  std::int64_t diameter() const {
    std::int64_t d = 0;
    for (const auto& rule : rules_) {
      std::vector<Site> pts = rule.offsets();
      pts.push_back({0, 0});
      for (const Site& a : pts)
        for (const Site& b : pts) d = std::max(d, chebyshev(a, b));
    }
    return d;
  }

  // Same rules, ignoring the label.
  bool same_rules(const UpdateFamily& other) const { return rules_ == other.rules_; }

 private:
  std::vector<UpdateRule> rules_;
  std::string name_;
};

inline UpdateFamily duarte_family() {
  return UpdateFamily({UpdateRule{{-1, 0}, {0, 1}},
                       UpdateRule{{-1, 0}, {0, -1}},
                       UpdateRule{{0, 1}, {0, -1}}},
                      "duarte");
}

// Printed verbatim; note that {(1,0),(0,-1)} is not one of the Duarte rules.
inline UpdateFamily modified_duarte_family() {
  return UpdateFamily({UpdateRule{{-1, 0}, {0, -1}}, UpdateRule{{1, 0}, {0, -1}}},
                      "modified_duarte");
}

// All r-element subsets of the four nearest neighbours of the origin.
inline UpdateFamily r_neighbour_family(int r) {
  if (r < 1 || r > 4) throw InvalidArgument("r_neighbour needs r in {1,2,3,4}");
  const Site nbhd[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<UpdateRule> rules;
  for (unsigned mask = 0; mask < 16; ++mask) {
    if (std::popcount(mask) != r) continue;
    std::vector<Site> offs;
    for (int i = 0; i < 4; ++i)
      if (mask & (1u << i)) offs.push_back(nbhd[i]);
    rules.emplace_back(std::move(offs));
  }
  return UpdateFamily(std::move(rules), "r_neighbour(" + std::to_string(r) + ")");
}

// Accepts "duarte", "modified_duarte", "r_neighbour(r)" or "r_neighbour:r".
inline UpdateFamily builtin_family(std::string_view name) {
  if (name == "duarte") return duarte_family();
  if (name == "modified_duarte") return modified_duarte_family();
  constexpr std::string_view prefix = "r_neighbour";
  if (name.substr(0, prefix.size()) == prefix) {
    std::string_view rest = name.substr(prefix.size());
    if (!rest.empty() && (rest.front() == '(' || rest.front() == ':')) {
      const bool paren = rest.front() == '(';
      rest.remove_prefix(1);
      if (paren) {
        if (rest.empty() || rest.back() != ')') throw InvalidArgument("bad family name: " + std::string(name));
        rest.remove_suffix(1);
      }
      int r = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), r);
      if (ec == std::errc() && ptr == rest.data() + rest.size()) return r_neighbour_family(r);
    }
  }
  throw InvalidArgument("unknown family: " + std::string(name));
}

inline nlohmann::json family_to_json(const UpdateFamily& family) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : family.rules()) {
    nlohmann::json offs = nlohmann::json::array();
    for (const Site& s : rule.offsets()) offs.push_back({s.x, s.y});
    rules.push_back(std::move(offs));
  }
  return {{"name", family.name()}, {"rules", std::move(rules)}};
}

inline UpdateFamily family_from_json(const nlohmann::json& j) {
  try {
    std::vector<UpdateRule> rules;
    for (const auto& r : j.at("rules")) {
      std::vector<Site> offs;
      for (const auto& s : r) {
        if (!s.is_array() || s.size() != 2) throw InvalidArgument("rule offsets must be [dx,dy] pairs");
        offs.push_back({s.at(0).get<std::int64_t>(), s.at(1).get<std::int64_t>()});
      }
      rules.emplace_back(std::move(offs));
    }
    std::string name = j.contains("name") ? j.at("name").get<std::string>() : std::string{};
    return UpdateFamily(std::move(rules), std::move(name));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed family JSON: ") + e.what());
  }
}

// Builtin name or inline JSON text.
inline UpdateFamily parse_family(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("malformed family JSON: ") + e.what());
    }
    return family_from_json(j);
  }
  return builtin_family(text);
}

}  // namespace bootlab
