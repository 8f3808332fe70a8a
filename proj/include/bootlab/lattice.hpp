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

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "site.hpp"

namespace bootlab {

// Either the discrete torus Z_n^2 (coordinates 0..n-1) or a bounded window
// of Z^2 whose exterior is permanently uninfected.
class Geometry {
 public:
  static Geometry torus(std::int64_t n) {
    if (n < 1) throw InvalidArgument("torus side must be at least 1");
    Geometry g;
    g.torus_ = true;
    g.box_ = {0, 0, n - 1, n - 1};
    return g;
  }

  static Geometry window(const Box& box) {
    if (box.empty()) throw InvalidArgument("window must be nonempty");
    Geometry g;
    g.torus_ = false;
    g.box_ = box;
    return g;
  }

  bool is_torus() const { return torus_; }
  const Box& box() const { return box_; }
  std::int64_t width() const { return box_.width(); }
  std::int64_t height() const { return box_.height(); }
  std::int64_t size() const { return width() * height(); }
  bool contains(Site s) const { return box_.contains(s); }

  // Reduces a site modulo n on the torus; identity on windows.
  Site wrap(Site s) const {
    if (!torus_) return s;
    const std::int64_t n = box_.width();
    return {((s.x % n) + n) % n, ((s.y % n) + n) % n};
  }

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  Geometry() = default;
  bool torus_ = false;
  Box box_{};
};

// Set of infected sites inside a geometry, packed row-major with every row
// starting on a fresh 64-bit word.
class LatticeState {
 public:
  explicit LatticeState(Geometry geometry)
      : geometry_(geometry),
        words_per_row_(static_cast<std::size_t>((geometry.width() + 63) / 64)),
        bits_(words_per_row_ * static_cast<std::size_t>(geometry.height()), 0) {}

  template <typename Range>
  LatticeState(Geometry geometry, const Range& sites) : LatticeState(geometry) {
    for (const Site& s : sites) set(s);
  }

  const Geometry& geometry() const { return geometry_; }
  std::size_t words_per_row() const { return words_per_row_; }

  bool test(Site s) const {
    if (geometry_.is_torus()) s = geometry_.wrap(s);
    if (!geometry_.contains(s)) return false;
    auto [w, b] = locate(s);
    return (bits_[w] >> b) & 1u;
  }

  void set(Site s) {
    if (geometry_.is_torus()) s = geometry_.wrap(s);
    if (!geometry_.contains(s)) throw InvalidArgument("site lies outside the geometry");
    auto [w, b] = locate(s);
    bits_[w] |= std::uint64_t{1} << b;
  }

  void reset(Site s) {
    if (geometry_.is_torus()) s = geometry_.wrap(s);
    if (!geometry_.contains(s)) return;
    auto [w, b] = locate(s);
    bits_[w] &= ~(std::uint64_t{1} << b);
  }

  void fill() {
    for (std::int64_t r = 0; r < geometry_.height(); ++r) {
      auto row = row_words(r);
      for (auto& w : row) w = ~std::uint64_t{0};
      clear_tail(row);
    }
  }

  std::int64_t count() const {
    std::int64_t c = 0;
    for (auto w : bits_) c += std::popcount(w);
    return c;
  }

  bool empty() const { return count() == 0; }
  bool full() const { return count() == geometry_.size(); }

  // Infected sites in row-major order (y ascending, then x ascending).
  std::vector<Site> sites() const {
    std::vector<Site> out;
    const Box& b = geometry_.box();
    for (std::int64_t r = 0; r < geometry_.height(); ++r) {
      auto row = row_words(r);
      for (std::size_t w = 0; w < row.size(); ++w) {
        std::uint64_t word = row[w];
        while (word) {
          const int bit = std::countr_zero(word);
          out.push_back({b.x_min + static_cast<std::int64_t>(w * 64 + bit), b.y_min + r});
          word &= word - 1;
        }
      }
    }
    return out;
  }

  bool subset_of(const LatticeState& other) const {
    require_same(other);
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] & ~other.bits_[i]) return false;
    return true;
  }

  LatticeState& operator|=(const LatticeState& other) {
    require_same(other);
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return *this;
  }

  friend bool operator==(const LatticeState& a, const LatticeState& b) {
    return a.geometry_ == b.geometry_ && a.bits_ == b.bits_;
  }

  std::span<std::uint64_t> row_words(std::int64_t r) {
    return {bits_.data() + static_cast<std::size_t>(r) * words_per_row_, words_per_row_};
  }
  std::span<const std::uint64_t> row_words(std::int64_t r) const {
    return {bits_.data() + static_cast<std::size_t>(r) * words_per_row_, words_per_row_};
  }

  // Zeroes the padding bits beyond the geometry width in a row.
  void clear_tail(std::span<std::uint64_t> row) const {
    const std::int64_t rem = geometry_.width() % 64;
    if (rem != 0 && !row.empty()) row.back() &= (std::uint64_t{1} << rem) - 1;
  }

  // Text grid, one line per row from the top row (largest y) down, '1' for
  // infected and '0' for healthy.
  std::string to_pbm() const {
    std::string out;
    const Box& b = geometry_.box();
    out.reserve(static_cast<std::size_t>((geometry_.width() + 1) * geometry_.height()));
    for (std::int64_t y = b.y_max; y >= b.y_min; --y) {
      for (std::int64_t x = b.x_min; x <= b.x_max; ++x) out.push_back(test({x, y}) ? '1' : '0');
      out.push_back('\n');
    }
    return out;
  }

 private:
  std::pair<std::size_t, unsigned> locate(Site s) const {
    const Box& b = geometry_.box();
    const auto col = static_cast<std::size_t>(s.x - b.x_min);
    const auto row = static_cast<std::size_t>(s.y - b.y_min);
    return {row * words_per_row_ + col / 64, static_cast<unsigned>(col % 64)};
  }

  void require_same(const LatticeState& other) const {
    if (!(geometry_ == other.geometry_)) throw InvalidArgument("lattice states have different geometries");
  }

  Geometry geometry_;
  std::size_t words_per_row_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace bootlab
