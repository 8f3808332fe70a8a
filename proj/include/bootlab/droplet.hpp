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
#include <utility>
#include <vector>

#include <json.hpp>

#include "bootlab/error.hpp"
#include "bootlab/site.hpp"

namespace bootlab {

inline constexpr double kTolerance = 1e-9;

struct GrowthParams {
  double epsilon = 0.1;
  double p = 0.01;

  GrowthParams() = default;
  GrowthParams(double eps, double prob) : epsilon(eps), p(prob) {
    if (!(eps > 0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive");
    if (!(prob > 0 && prob < 1)) throw InvalidArgument("p must lie in (0,1)");
  }
  double log_inv_p() const { return -std::log(p); }
  friend bool operator==(const GrowthParams&, const GrowthParams&) = default;
};

// f(x) = (1/2p) log(1 + eps^3 p x / log(1/p))
inline double f_eval(const GrowthParams& g, double x) {
  if (x < 0) throw InvalidArgument("f is defined for x >= 0");
  const double e3 = g.epsilon * g.epsilon * g.epsilon;
  return std::log1p(e3 * g.p * x / g.log_inv_p()) / (2 * g.p);
}

inline double f_inverse(const GrowthParams& g, double h) {
  if (h < 0) throw InvalidArgument("f_inverse needs h >= 0");
  const double e3 = g.epsilon * g.epsilon * g.epsilon;
  return g.log_inv_p() * std::expm1(2 * g.p * h) / (e3 * g.p);
}

inline double f_derivative(const GrowthParams& g, double x) {
  const double e3 = g.epsilon * g.epsilon * g.epsilon;
  return e3 / (2 * g.log_inv_p()) * std::exp(-2 * g.p * f_eval(g, x));
}

// (a,b) + {(x,y) : 0 <= x <= w, |y| <= f(x)}
struct DuarteRegion {
  GrowthParams params;
  double a = 0;
  double b = 0;
  double w = 0;

  double height() const { return 2 * f_eval(params, w) + 1; }
  double width() const { return w; }
  double right_x() const { return a + w; }
  double half_height_at(double x) const { return f_eval(params, std::max(0.0, x - a)); }

  bool contains(double x, double y) const {
    if (x < a - kTolerance || x > a + w + kTolerance) return false;
    return std::abs(y - b) <= half_height_at(x) + kTolerance;
  }
  bool contains(Site s) const { return contains(static_cast<double>(s.x), static_cast<double>(s.y)); }

  struct Edge {
    double x, y_lo, y_hi;
  };
  Edge right_edge() const {
    const double h = f_eval(params, w);
    return {a + w, b - h, b + h};
  }

  // Lattice sites column by column, bottom to top.
  std::vector<std::pair<std::int64_t, std::pair<std::int64_t, std::int64_t>>> columns() const {
    std::vector<std::pair<std::int64_t, std::pair<std::int64_t, std::int64_t>>> out;
    const auto x0 = static_cast<std::int64_t>(std::ceil(a - kTolerance));
    const auto x1 = static_cast<std::int64_t>(std::floor(a + w + kTolerance));
    for (std::int64_t x = x0; x <= x1; ++x) {
      const double h = half_height_at(static_cast<double>(x));
      const auto lo = static_cast<std::int64_t>(std::ceil(b - h - kTolerance));
      const auto hi = static_cast<std::int64_t>(std::floor(b + h + kTolerance));
      if (lo <= hi) out.push_back({x, {lo, hi}});
    }
    return out;
  }

  std::vector<Site> sites() const {
    std::vector<Site> out;
    for (const auto& [x, r] : columns())
      for (std::int64_t y = r.first; y <= r.second; ++y) out.push_back({x, y});
    return out;
  }

  Box bounding_box() const {
    Box box;
    for (const auto& [x, r] : columns()) {
      box.extend({x, r.first});
      box.extend({x, r.second});
    }
    return box;
  }
};

// A droplet is the lattice part of a Duarte region; height and width come
// from the region.
struct Droplet {
  DuarteRegion region;

  double height() const { return region.height(); }
  double width() const { return region.width(); }
  std::vector<Site> sites() const { return region.sites(); }
};

inline nlohmann::json region_to_json(const DuarteRegion& r) {
  return {{"epsilon", r.params.epsilon}, {"p", r.params.p}, {"source", {r.a, r.b}}, {"width", r.w}};
}

inline DuarteRegion region_from_json(const nlohmann::json& j) {
  try {
    DuarteRegion r;
    r.params = GrowthParams(j.at("epsilon").get<double>(), j.at("p").get<double>());
    r.a = j.at("source").at(0).get<double>();
    r.b = j.at("source").at(1).get<double>();
    r.w = j.at("width").get<double>();
    if (r.w < 0) throw InvalidArgument("region width must be nonnegative");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed region: ") + e.what());
  }
}

namespace detail {

struct ColumnSpan {
  double x, lo, hi;
};

inline std::vector<ColumnSpan> column_spans(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> pts = points;
  std::sort(pts.begin(), pts.end());
  std::vector<ColumnSpan> cols;
  for (const auto& [x, y] : pts) {
    if (!cols.empty() && cols.back().x == x) {
      cols.back().lo = std::min(cols.back().lo, y);
      cols.back().hi = std::max(cols.back().hi, y);
    } else {
      cols.push_back({x, y, y});
    }
  }
  return cols;
}

// Slack max_i(y_i - f_i) - min_i(y_i + f_i); feasible iff <= 0.
inline double infeasibility(const GrowthParams& g, const std::vector<ColumnSpan>& cols, double c,
                            double w, double* mid = nullptr) {
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  const double a = c - w;
  for (const ColumnSpan& col : cols) {
    const double f = f_eval(g, std::max(0.0, col.x - a));
    lo = std::max(lo, col.hi - f);
    hi = std::min(hi, col.lo + f);
  }
  if (mid) *mid = 0.5 * (lo + hi);
  return lo - hi;
}

}  // namespace detail

// Smallest Duarte region containing the points, with its right edge on the
// rightmost point.
inline DuarteRegion minimal_region(const GrowthParams& g, const std::vector<std::pair<double, double>>& points) {
  if (points.empty()) throw InvalidArgument("minimal_region needs at least one point");
  const auto cols = detail::column_spans(points);
  const double c = cols.back().x;
  double spread_lo = cols.front().lo, spread_hi = cols.front().hi;
  for (const auto& col : cols) {
    spread_lo = std::min(spread_lo, col.lo);
    spread_hi = std::max(spread_hi, col.hi);
  }
  double lo = c - cols.front().x;
  double hi = lo + f_inverse(g, 0.5 * (spread_hi - spread_lo)) + 1;
  if (detail::infeasibility(g, cols, c, lo) > 0) {
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double m = 0.5 * (lo + hi);
      if (detail::infeasibility(g, cols, c, m) <= 0) hi = m;
      else lo = m;
    }
    lo = hi;
  }
  DuarteRegion r;
  r.params = g;
  r.w = lo + (lo > c - cols.front().x ? kTolerance : 0.0);
  r.a = c - r.w;
  detail::infeasibility(g, cols, c, r.w, &r.b);
  return r;
}

inline DuarteRegion minimal_region(const GrowthParams& g, const std::vector<Site>& sites) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(sites.size());
  for (const Site& s : sites) pts.emplace_back(static_cast<double>(s.x), static_cast<double>(s.y));
  return minimal_region(g, pts);
}

inline Droplet droplet_of(const GrowthParams& g, const std::vector<Site>& sites) {
  return Droplet{minimal_region(g, sites)};
}

// Containment via the right edge of the inner region.
inline bool region_contains(const DuarteRegion& outer, const DuarteRegion& inner) {
  if (!(outer.params == inner.params)) throw InvalidArgument("regions use different parameters");
  const auto e = inner.right_edge();
  if (e.x > outer.right_x() + kTolerance || e.x < outer.a - kTolerance) return false;
  return outer.contains(e.x, e.y_lo) && outer.contains(e.x, e.y_hi);
}

// Literal check of the bi-chain property, sets given as indicator vectors
// over {1..n}.
inline bool bichain_pair(const std::vector<bool>& A, const std::vector<bool>& B) {
  const std::size_t n = A.size();
  std::size_t first_a = n + 1, first_b = n + 1, last_a = 0, last_b = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool a = A[i - 1], b = B[i - 1];
    if (a && !b) {
      if (first_a == n + 1) first_a = i;
      last_a = i;
    }
    if (b && !a) {
      if (first_b == n + 1) first_b = i;
      last_b = i;
    }
  }
  // Prefix {1..k} is comparable iff k < max(first_a, first_b); suffix
  // {k+1..n} iff k >= min(last_a, last_b).
  const std::size_t k_lo = std::max<std::size_t>(1, std::min(last_a, last_b));
  const std::size_t k_hi = std::min(n, std::max(first_a, first_b) - 1);
  return k_lo <= k_hi;
}

inline bool is_bichain(const std::vector<std::vector<bool>>& sets) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (sets[i].size() != sets[j].size()) throw InvalidArgument("sets must share a ground set");
      if (sets[i] == sets[j]) continue;
      if (!bichain_pair(sets[i], sets[j])) return false;
    }
  }
  return true;
}

}  // namespace bootlab
