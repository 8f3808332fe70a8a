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
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "bootlab/droplet.hpp"
#include "bootlab/error.hpp"

namespace bootlab {

// Column profile of a lattice droplet: (lo, hi) per column, columns 1..n.
using ColumnProfile = std::vector<std::pair<std::int64_t, std::int64_t>>;

struct ShapeCount {
  std::size_t count = 0;
  std::int64_t grid = 0;  // resolution in the source x-coordinate at convergence
  std::vector<ColumnProfile> shapes;
  // floor(b + f(x - a)) for columns 1..w, one entry per distinct top curve.
  std::vector<std::vector<std::int64_t>> tops;
};

namespace detail {

// Region with right edge at x = w and source (a,b). Width zero when w = 0.
inline DuarteRegion counting_region(const GrowthParams& g, std::int64_t w, double a, double b) {
  DuarteRegion r;
  r.params = g;
  r.a = a;
  r.b = b;
  r.w = w == 0 ? 0.0 : static_cast<double>(w) - a;
  return r;
}

inline ColumnProfile profile_of(const DuarteRegion& r, std::int64_t w) {
  ColumnProfile out(static_cast<std::size_t>(std::max<std::int64_t>(w, 1)), {1, 0});
  for (const auto& [x, span] : r.columns()) {
    if (x >= 1 && x <= static_cast<std::int64_t>(out.size())) out[static_cast<std::size_t>(x - 1)] = span;
  }
  return out;
}

// All lattice droplets for one source x-coordinate. The lattice set is a step
// function of b whose jumps sit where b -/+ f(x - a) hits an integer, so
// evaluating at every jump and between consecutive jumps is exhaustive.
inline std::vector<std::int64_t> top_of(const DuarteRegion& r, std::int64_t w) {
  std::vector<std::int64_t> out;
  for (std::int64_t x = 1; x <= w; ++x)
    out.push_back(static_cast<std::int64_t>(std::floor(r.b + r.half_height_at(static_cast<double>(x)) + kTolerance)));
  return out;
}

inline void shapes_for_a(const GrowthParams& g, std::int64_t w, double a, std::set<ColumnProfile>& out,
                         std::set<std::vector<std::int64_t>>& tops) {
  const DuarteRegion probe = counting_region(g, w, a, 1.0);
  std::vector<double> cuts = {1.0};
  for (const auto& [x, span] : probe.columns()) {
    (void)span;
    const double f = probe.half_height_at(static_cast<double>(x));
    for (double v : {f, -f}) {
      double frac = v - std::floor(v);
      if (frac <= 0) frac = 1.0;
      cuts.push_back(frac);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double prev = 0.0;
  for (double c : cuts) {
    for (double b : {0.5 * (prev + c), c}) {
      const DuarteRegion r = counting_region(g, w, a, b);
      out.insert(profile_of(r, w));
      tops.insert(top_of(r, w));
    }
    prev = c;
  }
}

}  // namespace detail

// Distinct lattice droplets whose source lies in (0,1]x(0,1] and whose right
// edge sits at x = w. The source x-coordinate is sampled on a grid of
// resolution 1/k, doubling k until three successive counts agree.
inline ShapeCount enumerate_droplet_shapes(const GrowthParams& g, std::int64_t w, std::int64_t max_grid = 1 << 14) {
  if (w < 0) throw InvalidArgument("width must be nonnegative");
  std::size_t last = 0;
  int agreeing = 0;
  for (std::int64_t k = 16; k <= max_grid; k *= 2) {
    std::set<ColumnProfile> shapes;
    std::set<std::vector<std::int64_t>> tops;
    for (std::int64_t j = 1; j <= k; ++j)
      detail::shapes_for_a(g, w, static_cast<double>(j) / static_cast<double>(k), shapes, tops);
    agreeing = shapes.size() == last ? agreeing + 1 : 0;
    if (agreeing == 2) {
      ShapeCount out;
      out.count = shapes.size();
      out.grid = k;
      out.shapes.assign(shapes.begin(), shapes.end());
      out.tops.assign(tops.begin(), tops.end());
      return out;
    }
    last = shapes.size();
  }
  throw BudgetExceeded("droplet shape count did not stabilise under refinement");
}

// Top curves as subsets of a common ground set: each column contributes one
// element per unit its top rises above the lowest top seen in that column.
inline std::vector<std::vector<bool>> top_profile_sets(const std::vector<std::vector<std::int64_t>>& tops) {
  if (tops.empty()) return {};
  const std::size_t cols = tops.front().size();
  std::vector<std::int64_t> base(cols, std::numeric_limits<std::int64_t>::max()), span(cols, 0);
  for (const auto& t : tops)
    for (std::size_t c = 0; c < cols; ++c) base[c] = std::min(base[c], t[c]);
  for (const auto& t : tops)
    for (std::size_t c = 0; c < cols; ++c) span[c] = std::max(span[c], t[c] - base[c]);
  std::size_t n = 0;
  for (auto v : span) n += static_cast<std::size_t>(v);
  std::vector<std::vector<bool>> out;
  for (const auto& t : tops) {
    std::vector<bool> set(n, false);
    std::size_t offset = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::int64_t j = 0; j < t[c] - base[c]; ++j) set[offset + static_cast<std::size_t>(j)] = true;
      offset += static_cast<std::size_t>(span[c]);
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace bootlab
