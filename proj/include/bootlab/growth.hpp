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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootlab/dynamics.hpp"
#include "bootlab/error.hpp"
#include "bootlab/family.hpp"
#include "bootlab/lattice.hpp"
#include "bootlab/parallel.hpp"
#include "bootlab/philox.hpp"
#include "bootlab/site.hpp"
#include "bootlab/stats.hpp"

namespace bootlab {

// Real-valued rectangle {x0 <= x <= x1, y0 <= y <= y1} before rounding.
struct RealRect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

inline Box floor_rect(const RealRect& r) {
  return {static_cast<std::int64_t>(std::floor(r.x0)), static_cast<std::int64_t>(std::floor(r.y0)),
          static_cast<std::int64_t>(std::floor(r.x1)), static_cast<std::int64_t>(std::floor(r.y1))};
}

// Right-hand column of a rectangle.
inline Box right_side(const Box& b) { return {b.x_max, b.y_min, b.x_max, b.y_max}; }

// One conditional event of the growth construction: pre-infect `assumed`,
// sample every other site of `window` at probability p, close inside the
// window, and ask whether all of `target` is infected.
struct GrowthEvent {
  int stage = 0;
  std::string name;
  RealRect rect_real;
  Box rect;
  RealRect rect_prime_real;
  Box rect_prime;
  Box window;
  std::vector<Box> assumed;
  Box target;
  // Lower bound from the rounded geometry, and the same bound evaluated on
  // the real-valued geometry.
  double bound = 0;
  double real_bound = 0;
};

struct GrowthStageReport {
  GrowthEvent event;
  std::int64_t fresh_sites = 0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double emp = 0;
  Interval interval;
  double sigma = 0;
  bool pass = false;
};

struct GrowthPlan {
  double epsilon = 0;  // after replacing by 1/ceil(1/epsilon)
  int k = 0;
  double p = 0;
  double h = 0;
  std::vector<double> w;  // w[i-1] = w_i
  double w_hat = 0;
  std::vector<GrowthEvent> events;
};

struct GrowthResult {
  GrowthPlan plan;
  std::vector<GrowthStageReport> reports;
};

inline constexpr std::int64_t kGrowthMaxSites = std::int64_t{1} << 26;

namespace detail {

inline bool inside_any(const std::vector<Box>& boxes, Site s) {
  for (const auto& b : boxes)
    if (b.contains(s)) return true;
  return false;
}

inline Box hull(const Box& a, const Box& b) {
  return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
          std::max(a.y_max, b.y_max)};
}

// A column of height H next to a full column fills iff it holds a seed.
inline double rightward_bound(double p, std::int64_t width, std::int64_t height) {
  return std::pow(1.0 - std::pow(1.0 - p, static_cast<double>(height)), static_cast<double>(width));
}

// `extra` fresh rows over a full rectangle of the given width. Pairs of rows
// fill from a seed in the upper row of the pair (a lone last row from any
// seed in it); splitting the width into one block per pair, left to right,
// and asking for a seed in each block suffices.
inline double upward_bound(double p, std::int64_t width, std::int64_t extra) {
  if (extra <= 0) return 1.0;
  const std::int64_t pairs = (extra + 1) / 2;
  const std::int64_t block = width / pairs;
  if (block <= 0) return 0.0;
  return std::pow(1.0 - std::pow(1.0 - p, static_cast<double>(block)), static_cast<double>(pairs));
}

}  // namespace detail

inline GrowthPlan growth_plan(double epsilon, double p) {
  if (!(epsilon > 0 && epsilon <= 1)) throw InvalidArgument("epsilon must lie in (0,1]");
  if (!(p > 0 && p < 1)) throw InvalidArgument("p must lie in (0,1)");
  GrowthPlan g;
  g.k = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
  g.epsilon = 1.0 / g.k;
  g.p = p;
  const double eps = g.epsilon;
  const double L = std::log(1.0 / p);
  g.h = eps / p * L;

  std::vector<double> S{0.0};
  for (int i = 1; i <= g.k; ++i) {
    g.w.push_back(std::pow(p, -1.0 - i * eps));
    S.push_back(S.back() + g.w.back());
  }
  g.w_hat = S.back();

  const double pi5 = std::pow(p, -5.0);
  const double pi3 = std::pow(p, -3.0);
  const RealRect r_real{0, 0, pi5, pi3};
  if ((std::floor(pi5) + 1) * (std::floor(pi3) + 1) > static_cast<double>(kGrowthMaxSites))
    throw BudgetExceeded("growth construction exceeds the memory guard; increase p");

  // R_0 = R_0'.
  {
    GrowthEvent e;
    e.stage = 0;
    e.name = "r0_fill";
    e.rect_real = e.rect_prime_real = {0, 0, 0, g.h};
    e.rect = e.rect_prime = floor_rect(e.rect_real);
    e.window = e.rect;
    e.target = e.rect;
    // Alternate sites from the bottom plus the top site fill the column.
    const std::int64_t top = e.rect.y_max;
    e.bound = std::pow(p, static_cast<double>(top / 2 + 1 + top % 2));
    e.real_bound = std::pow(p, std::floor(g.h / 2) + 1);
    g.events.push_back(e);
  }

  Box prev_prime = g.events.back().rect_prime;
  for (int i = 1; i <= g.k; ++i) {
    const RealRect ri{1 + S[i - 1], 0, S[i], i * g.h};
    const RealRect rpi{1 + S[i - 1], 0, S[i], (i + 1) * g.h};
    const Box rect = floor_rect(ri);
    const Box prime = floor_rect(rpi);

    GrowthEvent right;
    right.stage = i;
    right.name = "right_" + std::to_string(i);
    right.rect_real = ri;
    right.rect = rect;
    right.rect_prime_real = rpi;
    right.rect_prime = prime;
    right.assumed = {right_side(prev_prime)};
    right.window = detail::hull(right_side(prev_prime), rect);
    right.target = rect;
    right.bound = detail::rightward_bound(p, rect.width(), rect.height());
    right.real_bound = std::pow(1.0 - std::pow(p, i * eps), g.w[i - 1]);
    g.events.push_back(right);

    GrowthEvent up = right;
    up.name = "up_" + std::to_string(i);
    up.assumed = {rect};
    up.window = prime;
    up.target = right_side(prime);
    up.bound = detail::upward_bound(p, rect.width(), prime.y_max - rect.y_max);
    up.real_bound = std::pow(p, (1 - i * eps + eps * eps) * g.h / 2);
    g.events.push_back(up);
    prev_prime = prime;
  }

  // (1 + eps)/p log(1/p) = (k + 1) h, written so that both round alike.
  const double top_hat = (g.k + 1) * g.h;
  const RealRect rh1{g.w_hat + 1, 0, g.w_hat + std::pow(p, -2 - eps), top_hat};
  const RealRect rh1p{g.w_hat + 1, 0, g.w_hat + std::pow(p, -2 - eps), std::pow(p, -1 - eps / 2)};
  const RealRect rh2{g.w_hat + std::pow(p, -2 - eps) + 1, 0, pi5, std::pow(p, -1 - eps / 2)};
  const Box h1 = floor_rect(rh1);
  const Box h1p = floor_rect(rh1p);
  const Box h2 = floor_rect(rh2);
  const Box r = floor_rect(r_real);
  // The boundary of R-hat_0 is the boundary of R_k'.
  const Box d_hat0 = right_side(prev_prime);

  {
    GrowthEvent e;
    e.stage = g.k + 1;
    e.name = "rhat1_right";
    e.rect_real = rh1;
    e.rect = h1;
    e.rect_prime_real = rh1p;
    e.rect_prime = h1p;
    e.assumed = {d_hat0};
    e.window = detail::hull(d_hat0, h1);
    e.target = h1;
    e.bound = detail::rightward_bound(p, h1.width(), h1.height());
    e.real_bound = std::pow(1.0 - std::pow(1.0 - p, top_hat), rh1.x1 - rh1.x0 + 1);
    g.events.push_back(e);

    GrowthEvent u = e;
    u.name = "rhat1p_up";
    u.assumed = {h1};
    u.window = detail::hull(h1, h1p);
    u.target = right_side(h1p);
    u.bound = detail::upward_bound(p, h1.width(), h1p.y_max - h1.y_max);
    const double hp = rh1p.y1;
    u.real_bound = std::pow(1.0 - std::pow(1.0 - p, (rh1.x1 - rh1.x0 + 1) / hp), hp / 2);
    g.events.push_back(u);
  }
  {
    const Box d_h1p = right_side(h1p);
    GrowthEvent e;
    e.stage = g.k + 2;
    e.name = "rhat2_right";
    e.rect_real = rh2;
    e.rect = h2;
    e.rect_prime_real = r_real;
    e.rect_prime = r;
    e.assumed = {d_h1p};
    e.window = detail::hull(d_h1p, h2);
    e.target = h2;
    e.bound = detail::rightward_bound(p, h2.width(), h2.height());
    e.real_bound = std::pow(1.0 - std::pow(1.0 - p, rh2.y1 + 1), rh2.x1 - rh2.x0 + 1);
    g.events.push_back(e);

    GrowthEvent u = e;
    u.stage = g.k + 3;
    u.name = "r_up";
    u.rect_real = r_real;
    u.rect = r;
    u.assumed = {h2};
    u.window = detail::hull(r, h2);
    u.target = right_side(r);
    u.bound = detail::upward_bound(p, h2.width(), r.y_max - h2.y_max);
    u.real_bound = std::pow(1.0 - std::pow(1.0 - p, (rh2.x1 - rh2.x0 + 1) / pi3), pi3 / 2);
    g.events.push_back(u);
  }
  return g;
}

// Monte Carlo estimate of one event. Trial t of event index `stream` draws
// its uniforms from counter stream (stream << 32) + t.
inline GrowthStageReport run_growth_event(const GrowthEvent& e, double p, std::int64_t trials, std::uint64_t seed,
                                          std::uint64_t stream, std::optional<unsigned> workers = std::nullopt) {
  if (trials < 1) throw InvalidArgument("need at least one trial");
  if (e.window.width() * e.window.height() > kGrowthMaxSites)
    throw BudgetExceeded("growth event window exceeds the memory guard");
  const UpdateFamily family = duarte_family();
  const Geometry geom = Geometry::window(e.window);
  const std::uint64_t threshold = infection_threshold(p);
  const auto W = static_cast<std::uint64_t>(e.window.width());
  const auto area = W * static_cast<std::uint64_t>(e.window.height());

  std::vector<std::uint8_t> fresh(area, 0);
  std::int64_t fresh_sites = 0;
  for (std::uint64_t i = 0; i < area; ++i) {
    const Site s{e.window.x_min + static_cast<std::int64_t>(i % W), e.window.y_min + static_cast<std::int64_t>(i / W)};
    fresh[i] = !detail::inside_any(e.assumed, s);
    fresh_sites += fresh[i];
  }

  unsigned nw = resolve_workers(workers);
  nw = std::max(1u, std::min<unsigned>(nw, static_cast<unsigned>(trials)));
  std::vector<std::optional<ClosureKernel>> kernels(nw);
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, nw, [&](std::int64_t t, unsigned w) {
    if (!kernels[w]) kernels[w].emplace(family, geom);
    ClosureKernel& k = *kernels[w];
    std::uint8_t* row = k.row(0);
    std::uint64_t x = 0, y = 0;
    SiteUniforms(seed, (stream << 32) + static_cast<std::uint64_t>(t)).fill(area, [&](std::uint64_t i, std::uint32_t u) {
      row[x] = (!fresh[i] || u < threshold) ? ClosureKernel::kInfected : ClosureKernel::kHealthy;
      if (++x == W) {
        x = 0;
        if (++y < area / W) row = k.row(static_cast<std::int64_t>(y));
      }
    });
    k.run();
    bool good = true;
    for (std::int64_t y = e.target.y_min; y <= e.target.y_max && good; ++y)
      for (std::int64_t x = e.target.x_min; x <= e.target.x_max && good; ++x) good = k.infected({x, y});
    ok[static_cast<std::size_t>(t)] = good;
  });

  GrowthStageReport rep;
  rep.event = e;
  rep.fresh_sites = fresh_sites;
  rep.trials = trials;
  for (auto o : ok) rep.successes += o;
  rep.emp = static_cast<double>(rep.successes) / static_cast<double>(trials);
  rep.interval = wilson_interval(rep.successes, trials);
  const double b = std::clamp(e.bound, 0.0, 1.0);
  rep.sigma = std::sqrt(b * (1 - b) / static_cast<double>(trials));
  rep.pass = rep.emp >= e.bound - 2 * rep.sigma;
  return rep;
}

inline GrowthResult growth_construction(double epsilon, double p, std::int64_t trials, std::uint64_t seed,
                                        std::optional<unsigned> workers = std::nullopt) {
  GrowthResult r;
  r.plan = growth_plan(epsilon, p);
  for (std::size_t i = 0; i < r.plan.events.size(); ++i)
    r.reports.push_back(run_growth_event(r.plan.events[i], p, trials, seed, i, workers));
  return r;
}

// A full rectangle plus one seed two rows above its top at column x0: the
// two rows above fill from x0 to the right edge.
inline bool two_row_mechanism(const Box& rect, std::int64_t x0) {
  if (rect.empty() || x0 < rect.x_min || x0 > rect.x_max) throw InvalidArgument("seed column outside the rectangle");
  const Box window{rect.x_min, rect.y_min, rect.x_max, rect.y_max + 2};
  std::vector<Site> seeds;
  for (std::int64_t y = rect.y_min; y <= rect.y_max; ++y)
    for (std::int64_t x = rect.x_min; x <= rect.x_max; ++x) seeds.push_back({x, y});
  seeds.push_back({x0, rect.y_max + 2});
  const LatticeState c = closure_in_window(seeds, duarte_family(), window);
  for (std::int64_t y = rect.y_max + 1; y <= rect.y_max + 2; ++y)
    for (std::int64_t x = x0; x <= rect.x_max; ++x)
      if (!c.test({x, y})) return false;
  return true;
}

// A full column x = 0 of the given height and one seed at (1, y0): column 1
// fills completely.
inline bool column_fill_mechanism(std::int64_t height, std::int64_t y0) {
  if (height < 1 || y0 < 0 || y0 >= height) throw InvalidArgument("seed row outside the column");
  const Box window{0, 0, 1, height - 1};
  std::vector<Site> seeds;
  for (std::int64_t y = 0; y < height; ++y) seeds.push_back({0, y});
  seeds.push_back({1, y0});
  const LatticeState c = closure_in_window(seeds, duarte_family(), window);
  for (std::int64_t y = 0; y < height; ++y)
    if (!c.test({1, y})) return false;
  return true;
}

inline nlohmann::json box_json(const Box& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }
inline nlohmann::json real_rect_json(const RealRect& r) { return {r.x0, r.y0, r.x1, r.y1}; }

inline nlohmann::json growth_report_json(const GrowthStageReport& r) {
  return {{"stage", r.event.stage},
          {"event", r.event.name},
          {"rect", box_json(r.event.rect)},
          {"rect_real", real_rect_json(r.event.rect_real)},
          {"rect_prime", box_json(r.event.rect_prime)},
          {"rect_prime_real", real_rect_json(r.event.rect_prime_real)},
          {"window", box_json(r.event.window)},
          {"target", box_json(r.event.target)},
          {"fresh_sites", r.fresh_sites},
          {"successes", r.successes},
          {"trials", r.trials},
          {"emp", r.emp},
          {"lo", r.interval.lo},
          {"hi", r.interval.hi},
          {"bound", r.event.bound},
          {"real_bound", r.event.real_bound},
          {"sigma", r.sigma},
          {"pass", r.pass}};
}

}  // namespace bootlab
