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
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bootlab/dynamics.hpp"
#include "bootlab/error.hpp"
#include "bootlab/family.hpp"
#include "bootlab/site.hpp"

namespace bootlab {

// Rational direction (a,b)/|(a,b)| stored in primitive form.
struct Direction {
  std::int64_t a = 1;
  std::int64_t b = 0;

  Direction() = default;
  Direction(std::int64_t a_, std::int64_t b_) : a(a_), b(b_) {
    if (a == 0 && b == 0) throw InvalidArgument("direction must be nonzero");
    const std::int64_t g = std::gcd(a, b);
    a /= g;
    b /= g;
  }

  Direction operator-() const { return {-a, -b}; }
  // Quarter turn counterclockwise.
  Direction rot_ccw() const { return {-b, a}; }
  friend bool operator==(const Direction&, const Direction&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Direction& d) {
    return os << '(' << d.a << ',' << d.b << ')';
  }
};

inline std::int64_t cross(const Direction& u, const Direction& v) { return u.a * v.b - u.b * v.a; }
inline std::int64_t dot(const Direction& u, const Direction& v) { return u.a * v.a + u.b * v.b; }
inline std::int64_t inner(Site x, const Direction& u) { return x.x * u.a + x.y * u.b; }

// Angle of v measured counterclockwise from `from` lies in [0, pi).
inline bool in_first_half(const Direction& from, const Direction& v) {
  const std::int64_t c = cross(from, v);
  return c > 0 || (c == 0 && dot(from, v) > 0);
}

// Strict order of angles measured counterclockwise from `from`, in [0, 2pi).
inline bool angle_less_from(const Direction& from, const Direction& u, const Direction& v) {
  const bool hu = in_first_half(from, u), hv = in_first_half(from, v);
  if (hu != hv) return hu;
  return cross(u, v) > 0;
}

// Strict order by polar angle in [0, 2pi).
inline bool angle_less(const Direction& u, const Direction& v) {
  return angle_less_from(Direction{1, 0}, u, v);
}

// Closed arc running counterclockwise from start to end.
struct Arc {
  Direction start;
  Direction end;

  bool contains(const Direction& u) const { return !angle_less_from(start, end, u); }
  friend bool operator==(const Arc&, const Arc&) = default;
};

struct StableSet {
  std::vector<Arc> arcs;
  std::vector<Direction> isolated;
  bool full_circle = false;

  bool contains(const Direction& u) const {
    if (full_circle) return true;
    if (std::find(isolated.begin(), isolated.end(), u) != isolated.end()) return true;
    return std::any_of(arcs.begin(), arcs.end(), [&](const Arc& arc) { return arc.contains(u); });
  }
  bool in_arc(const Direction& u) const {
    if (full_circle) return true;
    return std::any_of(arcs.begin(), arcs.end(), [&](const Arc& arc) { return arc.contains(u); });
  }
  bool empty() const { return !full_circle && arcs.empty() && isolated.empty(); }
};

// u is stable iff no rule lies entirely inside the open half-plane {<x,u> < 0}.
inline bool is_stable(const UpdateFamily& family, const Direction& u) {
  for (const auto& rule : family.rules()) {
    const bool inside = std::all_of(rule.offsets().begin(), rule.offsets().end(),
                                    [&](Site x) { return inner(x, u) < 0; });
    if (inside) return false;
  }
  return true;
}

// Perpendiculars of all rule sites, both orientations, sorted by angle.
inline std::vector<Direction> critical_directions(const UpdateFamily& family) {
  std::vector<Direction> dirs;
  for (const Site& s : family.distinct_offsets()) {
    dirs.emplace_back(-s.y, s.x);
    dirs.emplace_back(s.y, -s.x);
  }
  std::sort(dirs.begin(), dirs.end(), angle_less);
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  return dirs;
}

// A direction strictly inside the open counterclockwise gap from u to v.
inline Direction gap_midpoint(const Direction& u, const Direction& v) {
  if (u == v) return -u;
  if (cross(u, v) == 0) return u.rot_ccw();
  if (cross(u, v) > 0) return {u.a + v.a, u.b + v.b};
  return -Direction{u.a + v.a, u.b + v.b};
}

// Exact decomposition of the stable set. Stability is constant on every open
// gap between consecutive critical directions.
inline StableSet stable_set(const UpdateFamily& family) {
  const std::vector<Direction> crit = critical_directions(family);
  const std::size_t m = crit.size();
  std::vector<bool> at(m), gap(m);
  for (std::size_t i = 0; i < m; ++i) {
    at[i] = is_stable(family, crit[i]);
    gap[i] = is_stable(family, gap_midpoint(crit[i], crit[(i + 1) % m]));
  }

  StableSet out;
  if (std::all_of(at.begin(), at.end(), [](bool b) { return b; }) &&
      std::all_of(gap.begin(), gap.end(), [](bool b) { return b; })) {
    out.full_circle = true;
    return out;
  }
  // Start the sweep just after an unstable gap or point so runs do not wrap.
  std::size_t first = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!gap[(i + m - 1) % m] || !at[i]) {
      first = i;
      break;
    }
  }
  for (std::size_t n = 0; n < m; ++n) {
    const std::size_t i = (first + n) % m;
    if (!at[i]) continue;
    const bool joins_prev = gap[(i + m - 1) % m] && n > 0;
    if (joins_prev) continue;
    // i starts a run. Extend over consecutive stable gaps.
    std::size_t j = i, steps = 0;
    while (gap[j] && steps < m) {
      j = (j + 1) % m;
      ++steps;
    }
    if (steps == 0) {
      out.isolated.push_back(crit[i]);
    } else {
      out.arcs.push_back({crit[i], crit[j]});
    }
  }
  std::sort(out.isolated.begin(), out.isolated.end(), angle_less);
  std::sort(out.arcs.begin(), out.arcs.end(),
            [](const Arc& x, const Arc& y) { return angle_less(x.start, y.start); });
  return out;
}

// Difficulty values: exact finite, infinite, or a lower bound left open by
// the search budget.
struct DifficultyValue {
  enum class Kind { finite, infinite, unknown_at_least };
  Kind kind = Kind::finite;
  std::int64_t k = 0;

  static DifficultyValue finite(std::int64_t k) { return {Kind::finite, k}; }
  static DifficultyValue infinite() { return {Kind::infinite, 0}; }
  static DifficultyValue unknown_at_least(std::int64_t k) { return {Kind::unknown_at_least, k}; }

  bool is_finite() const { return kind == Kind::finite; }
  bool is_infinite() const { return kind == Kind::infinite; }
  bool is_unknown() const { return kind == Kind::unknown_at_least; }
  friend bool operator==(const DifficultyValue&, const DifficultyValue&) = default;

  std::string to_string() const {
    switch (kind) {
      case Kind::finite: return std::to_string(k);
      case Kind::infinite: return "inf";
      case Kind::unknown_at_least: return ">=" + std::to_string(k);
    }
    return {};
  }
};

inline std::ostream& operator<<(std::ostream& os, const DifficultyValue& v) { return os << v.to_string(); }

inline DifficultyValue dmax(const DifficultyValue& x, const DifficultyValue& y) {
  if (x.is_infinite() || y.is_infinite()) return DifficultyValue::infinite();
  if (x.is_finite() && y.is_finite()) return DifficultyValue::finite(std::max(x.k, y.k));
  return DifficultyValue::unknown_at_least(std::max(x.k, y.k));
}

inline DifficultyValue dmin(const DifficultyValue& x, const DifficultyValue& y) {
  if (x.is_infinite()) return y;
  if (y.is_infinite()) return x;
  if (x.is_finite() && y.is_finite()) return DifficultyValue::finite(std::min(x.k, y.k));
  if (x.is_finite() && x.k <= y.k) return x;
  if (y.is_finite() && y.k <= x.k) return y;
  return DifficultyValue::unknown_at_least(std::min(x.k, y.k));
}

enum class Tri { no, yes, unknown };

// Three-valued x <= y.
inline Tri dle(const DifficultyValue& x, const DifficultyValue& y) {
  if (y.is_infinite()) return Tri::yes;
  if (x.is_infinite()) return y.is_finite() ? Tri::no : Tri::unknown;
  if (x.is_finite() && y.is_finite()) return x.k <= y.k ? Tri::yes : Tri::no;
  if (x.is_unknown() && y.is_finite()) return x.k > y.k ? Tri::no : Tri::unknown;
  if (x.is_finite() && y.is_unknown()) return x.k <= y.k ? Tri::yes : Tri::unknown;
  return Tri::unknown;
}

struct DifficultyBudget {
  int max_helpers = 3;
  int window_radius = 12;
};

enum class Side { plus, minus, both };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::plus: return "plus";
    case Side::minus: return "minus";
    case Side::both: return "both";
  }
  return "";
}

struct DifficultyEstimate {
  Side side = Side::both;
  DifficultyValue value;
  std::vector<Site> witness;
  DifficultyBudget budget;
};

struct DifficultyReport {
  DifficultyEstimate plus, minus, combined;
};

namespace detail {

// Helper-site search in a finite window. The window slice of H_u is infected
// up front; helpers are drawn from a slab next to the line ordered by
// distance to the origin, and subsets are tried in that order.
class HelperSearch {
 public:
  HelperSearch(const UpdateFamily& family, const Direction& u, DifficultyBudget budget)
      : u_(u), budget_(budget), v_{u.b, -u.a} {
    const std::int64_t r = budget.window_radius;
    const std::int64_t half = r + 2 * family.diameter();
    box_ = Box{-half, -half, half, half};
    kernel_.emplace(family, Geometry::window(box_));

    const std::int64_t depth = family.reach() * (std::abs(u.a) + std::abs(u.b));
    const std::int64_t norm2 = u.a * u.a + u.b * u.b;
    for (std::int64_t y = -half; y <= half; ++y) {
      for (std::int64_t x = -half; x <= half; ++x) {
        const Site z{x, y};
        const std::int64_t level = inner(z, u_);
        if (level < 0) {
          base_.push_back(z);
          continue;
        }
        const std::int64_t t = along(z);
        // |t|/|u| <= r/4
        if (level <= depth && 16 * t * t <= r * r * norm2) candidates_.push_back(z);
      }
    }
    std::sort(candidates_.begin(), candidates_.end(), [&](Site p, Site q) {
      const auto kp = std::tuple{inner(p, u_), std::abs(along(p)), along(p), p};
      const auto kq = std::tuple{inner(q, u_), std::abs(along(q)), along(q), q};
      return kp < kq;
    });
    const std::int64_t step = std::max(std::abs(v_.x), std::abs(v_.y));
    for (std::int64_t m = -half / step; m <= half / step; ++m) {
      if (m != 0) line_.push_back({m * v_.x, m * v_.y});
    }
  }

  // Smallest helper count reaching the given side, with witness.
  DifficultyEstimate search(bool plus) {
    DifficultyEstimate est;
    est.side = plus ? Side::plus : Side::minus;
    est.budget = budget_;
    const int kmax = std::min<int>(budget_.max_helpers, static_cast<int>(candidates_.size()));
    for (int k = 0; k <= kmax; ++k) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      for (;;) {
        std::vector<Site> z;
        for (std::size_t i : idx) z.push_back(candidates_[i]);
        if (propagates(z, plus)) {
          est.value = DifficultyValue::finite(k);
          est.witness = z;
          return est;
        }
        if (!next_combination(idx, candidates_.size())) break;
      }
    }
    est.value = DifficultyValue::unknown_at_least(budget_.max_helpers + 1);
    return est;
  }

  bool propagates(const std::vector<Site>& helpers, bool plus) {
    ClosureKernel& kr = *kernel_;
    kr.clear();
    for (const Site& s : base_) kr.infect(s);
    for (const Site& s : helpers) kr.infect(s);
    kr.run();
    const std::int64_t r2 = static_cast<std::int64_t>(budget_.window_radius) * budget_.window_radius;
    for (const Site& s : line_) {
      if ((along(s) > 0) != plus || !kr.infected(s)) continue;
      const bool far = std::all_of(helpers.begin(), helpers.end(), [&](Site h) {
        const std::int64_t dx = s.x - h.x, dy = s.y - h.y;
        return 4 * (dx * dx + dy * dy) > r2;
      });
      if (far) return true;
    }
    return false;
  }

  const std::vector<Site>& candidates() const { return candidates_; }
  const Box& box() const { return box_; }

 private:
  std::int64_t along(Site z) const { return z.x * v_.x + z.y * v_.y; }

  static bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    for (std::size_t i = k; i-- > 0;) {
      if (idx[i] < n - k + i) {
        ++idx[i];
        for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        return true;
      }
    }
    return false;
  }

  Direction u_;
  DifficultyBudget budget_;
  Site v_;
  Box box_;
  std::optional<ClosureKernel> kernel_;
  std::vector<Site> base_, candidates_, line_;
};

}  // namespace detail

inline DifficultyValue combine_sides(const DifficultyValue& plus, const DifficultyValue& minus) {
  if (plus.is_infinite() || minus.is_infinite()) return DifficultyValue::infinite();
  return dmin(plus, minus);
}

// The positive side of the line {<x,u> = 0} is the one reached by turning u
// a quarter clockwise.
inline DifficultyReport difficulty_report(const UpdateFamily& family, const Direction& u,
                                          DifficultyBudget budget = {}) {
  DifficultyReport rep;
  rep.plus.side = Side::plus;
  rep.minus.side = Side::minus;
  rep.combined.side = Side::both;
  rep.plus.budget = rep.minus.budget = rep.combined.budget = budget;
  if (!is_stable(family, u)) {
    rep.plus.value = rep.minus.value = rep.combined.value = DifficultyValue::finite(0);
    return rep;
  }
  if (stable_set(family).in_arc(u)) {
    rep.plus.value = rep.minus.value = rep.combined.value = DifficultyValue::infinite();
    return rep;
  }
  detail::HelperSearch search(family, u, budget);
  rep.plus = search.search(true);
  rep.minus = search.search(false);
  rep.combined.value = combine_sides(rep.plus.value, rep.minus.value);
  if (rep.combined.value.is_finite()) {
    const bool take_plus = rep.plus.value.is_finite() && rep.plus.value.k == rep.combined.value.k;
    rep.combined.witness = take_plus ? rep.plus.witness : rep.minus.witness;
  }
  return rep;
}

inline DifficultyEstimate difficulty(const UpdateFamily& family, const Direction& u,
                                     DifficultyBudget budget = {}) {
  return difficulty_report(family, u, budget).combined;
}

enum class Kind { supercritical, critical, subcritical };
enum class Balance { balanced, unbalanced, not_applicable, indeterminate };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::supercritical: return "supercritical";
    case Kind::critical: return "critical";
    case Kind::subcritical: return "subcritical";
  }
  return "";
}

inline const char* to_string(Balance b) {
  switch (b) {
    case Balance::balanced: return "balanced";
    case Balance::unbalanced: return "unbalanced";
    case Balance::not_applicable: return "not_applicable";
    case Balance::indeterminate: return "indeterminate";
  }
  return "";
}

struct IsolatedDifficulty {
  Direction u;
  DifficultyReport report;
};

struct Classification {
  Kind kind = Kind::critical;
  Balance balance = Balance::not_applicable;
  DifficultyValue alpha;
  StableSet stable;
  std::vector<IsolatedDifficulty> isolated;
  DifficultyBudget budget;
  // Boundary direction c of an optimal open semicircle {u : cross(c,u) > 0}.
  std::optional<Direction> optimal_semicircle;
  std::optional<Direction> balancing_semicircle;
};

namespace detail {

// Boundary directions whose semicircles realise every combinatorial type.
inline std::vector<Direction> semicircle_boundaries(const std::vector<Direction>& crit) {
  std::vector<Direction> out;
  const std::size_t m = crit.size();
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(crit[i]);
    out.push_back(gap_midpoint(crit[i], crit[(i + 1) % m]));
  }
  return out;
}

inline bool arc_meets_semicircle(const Arc& arc, const Direction& c, bool closed) {
  auto inside = [&](const Direction& u) {
    const std::int64_t x = cross(c, u);
    return closed ? x >= 0 : x > 0;
  };
  return inside(arc.start) || inside(arc.end) || arc.contains(c.rot_ccw());
}

}  // namespace detail

inline Classification classify(const UpdateFamily& family, DifficultyBudget budget = {}) {
  Classification out;
  out.budget = budget;
  out.stable = stable_set(family);
  const StableSet& st = out.stable;
  const std::vector<Direction> bounds = detail::semicircle_boundaries(critical_directions(family));

  auto meets_arc = [&](const Direction& c, bool closed) {
    if (st.full_circle) return true;
    return std::any_of(st.arcs.begin(), st.arcs.end(),
                       [&](const Arc& a) { return detail::arc_meets_semicircle(a, c, closed); });
  };
  auto holds = [&](const Direction& u, const Direction& c, bool closed) {
    const std::int64_t x = cross(c, u);
    return closed ? x >= 0 : x > 0;
  };

  bool super = false, sub = true;
  for (const Direction& c : bounds) {
    const bool arc = meets_arc(c, false);
    if (arc) continue;
    sub = false;
    const bool point = std::any_of(st.isolated.begin(), st.isolated.end(),
                                   [&](const Direction& u) { return holds(u, c, false); });
    if (!point) super = true;
  }
  out.kind = super ? Kind::supercritical : (sub ? Kind::subcritical : Kind::critical);

  for (const Direction& u : st.isolated) out.isolated.push_back({u, difficulty_report(family, u, budget)});

  out.alpha = DifficultyValue::infinite();
  for (const Direction& c : bounds) {
    if (meets_arc(c, false)) continue;
    DifficultyValue worst = DifficultyValue::finite(0);
    for (const auto& iso : out.isolated)
      if (holds(iso.u, c, false)) worst = dmax(worst, iso.report.combined.value);
    const DifficultyValue next = dmin(out.alpha, worst);
    if (!out.optimal_semicircle || !(next == out.alpha)) out.optimal_semicircle = c;
    out.alpha = next;
  }

  if (out.kind != Kind::critical) {
    out.balance = Balance::not_applicable;
    return out;
  }
  bool any_unknown = false;
  for (const Direction& c : bounds) {
    Tri ok = Tri::yes;
    if (meets_arc(c, true)) ok = dle(DifficultyValue::infinite(), out.alpha);
    for (const auto& iso : out.isolated) {
      if (!holds(iso.u, c, true) || ok == Tri::no) continue;
      const Tri t = dle(iso.report.combined.value, out.alpha);
      if (t == Tri::no) ok = Tri::no;
      else if (t == Tri::unknown) ok = Tri::unknown;
    }
    if (ok == Tri::yes) {
      out.balance = Balance::balanced;
      out.balancing_semicircle = c;
      return out;
    }
    if (ok == Tri::unknown) any_unknown = true;
  }
  out.balance = any_unknown ? Balance::indeterminate : Balance::unbalanced;
  return out;
}

inline nlohmann::json direction_json(const Direction& u) { return nlohmann::json::array({u.a, u.b}); }

inline nlohmann::json difficulty_json(const DifficultyValue& v) {
  switch (v.kind) {
    case DifficultyValue::Kind::finite: return {{"kind", "finite"}, {"value", v.k}};
    case DifficultyValue::Kind::infinite: return {{"kind", "infinite"}};
    case DifficultyValue::Kind::unknown_at_least: return {{"kind", "unknown_at_least"}, {"value", v.k}};
  }
  return {};
}

inline nlohmann::json estimate_json(const DifficultyEstimate& e) {
  nlohmann::json w = nlohmann::json::array();
  for (const Site& s : e.witness) w.push_back({s.x, s.y});
  return {{"side", to_string(e.side)}, {"difficulty", difficulty_json(e.value)}, {"witness", std::move(w)}};
}

inline nlohmann::json classification_json(const Classification& c) {
  nlohmann::json arcs = nlohmann::json::array();
  for (const Arc& a : c.stable.arcs) arcs.push_back({{"start", direction_json(a.start)}, {"end", direction_json(a.end)}});
  nlohmann::json isolated = nlohmann::json::array();
  for (const Direction& u : c.stable.isolated) isolated.push_back(direction_json(u));
  nlohmann::json diffs = nlohmann::json::array();
  for (const auto& d : c.isolated) {
    diffs.push_back({{"direction", direction_json(d.u)},
                     {"plus", estimate_json(d.report.plus)},
                     {"minus", estimate_json(d.report.minus)},
                     {"combined", estimate_json(d.report.combined)}});
  }
  nlohmann::json j = {{"kind", to_string(c.kind)},
                      {"balance", to_string(c.balance)},
                      {"alpha", difficulty_json(c.alpha)},
                      {"stable_set", {{"full_circle", c.stable.full_circle}, {"arcs", arcs}, {"isolated", isolated}}},
                      {"isolated_difficulties", diffs},
                      {"budget", {{"max_helpers", c.budget.max_helpers}, {"window_radius", c.budget.window_radius}}}};
  j["optimal_semicircle"] = c.optimal_semicircle ? direction_json(*c.optimal_semicircle) : nlohmann::json();
  j["balancing_semicircle"] = c.balancing_semicircle ? direction_json(*c.balancing_semicircle) : nlohmann::json();
  return j;
}

}  // namespace bootlab
