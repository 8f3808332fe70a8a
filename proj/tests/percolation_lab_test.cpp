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

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "bootlab/growth.hpp"
#include "bootlab/percolation.hpp"

namespace bootlab {
namespace {

TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, FillMatchesRandomAccess) {
  const SiteUniforms u(42, 7);
  std::vector<std::uint32_t> seq;
  u.fill(37, [&](std::uint64_t i, std::uint32_t v) {
    EXPECT_EQ(i, seq.size());
    seq.push_back(v);
  });
  ASSERT_EQ(seq.size(), 37u);
  for (std::uint64_t i = 0; i < 37; ++i) EXPECT_EQ(seq[i], u.at(i));
  EXPECT_NE(SiteUniforms(42, 8).at(0), u.at(0));
  EXPECT_NE(SiteUniforms(43, 7).at(0), u.at(0));
}

TEST(Philox, UniformsLookUniform) {
  const SiteUniforms u(1, 0);
  const std::uint64_t thr = infection_threshold(0.3);
  std::int64_t hits = 0;
  const std::int64_t n = 200000;
  u.fill(n, [&](std::uint64_t, std::uint32_t v) { hits += v < thr; });
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.3, 4 * std::sqrt(0.21 / n));
}

TEST(Threshold, Endpoints) {
  EXPECT_EQ(infection_threshold(0), 0u);
  EXPECT_EQ(infection_threshold(1), std::uint64_t{1} << 32);
  EXPECT_EQ(infection_threshold(0.5), std::uint64_t{1} << 31);
  EXPECT_LE(infection_threshold(0.2), infection_threshold(0.2000001));
}

TEST(Wilson, KnownValues) {
  auto a = wilson_interval(5, 10);
  EXPECT_NEAR(a.lo, 0.236593, 1e-6);
  EXPECT_NEAR(a.hi, 0.763407, 1e-6);
  auto b = wilson_interval(0, 10);
  EXPECT_EQ(b.lo, 0.0);
  EXPECT_NEAR(b.hi, 0.277533, 1e-6);
  auto c = wilson_interval(10, 10);
  EXPECT_NEAR(c.lo, 0.722467, 1e-6);
  EXPECT_DOUBLE_EQ(c.hi, 1.0);
}

TEST(Wilson, ContainsPointEstimate) {
  for (int n : {1, 7, 50, 400})
    for (int k = 0; k <= n; ++k) {
      auto w = wilson_interval(k, n);
      const double f = static_cast<double>(k) / n;
      EXPECT_LE(w.lo, f + 1e-15);
      EXPECT_GE(w.hi, f - 1e-15);
      EXPECT_GE(w.lo, 0.0);
      EXPECT_LE(w.hi, 1.0);
    }
}

// Fixpoint iteration over a plain 0/1 grid.
bool naive_percolates(const UpdateFamily& fam, std::int64_t n, std::vector<std::uint8_t> g) {
  auto at = [&](std::int64_t x, std::int64_t y) { return g[((y % n + n) % n) * n + ((x % n + n) % n)]; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x) {
        if (g[y * n + x]) continue;
        for (const auto& r : fam.rules()) {
          bool all = true;
          for (const Site& s : r.offsets()) all = all && at(x + s.x, y + s.y);
          if (all) {
            g[y * n + x] = 1;
            changed = true;
            break;
          }
        }
      }
  }
  for (auto c : g)
    if (!c) return false;
  return true;
}

TEST(SamplePercolation, MatchesNaiveOracle) {
  for (const char* name : {"duarte", "modified_duarte", "r_neighbour(2)"}) {
    const UpdateFamily fam = builtin_family(name);
    const std::int64_t n = 8;
    for (double p : {0.2, 0.35, 0.5}) {
      TrialPlan plan{fam, n, p, 60, 99};
      const RunManifest m = sample_percolation(plan, 1);
      const std::uint64_t thr = infection_threshold(p);
      for (std::int64_t t = 0; t < plan.trials; ++t) {
        std::vector<std::uint8_t> g(n * n);
        SiteUniforms(99, t).fill(n * n, [&](std::uint64_t i, std::uint32_t u) { g[i] = u < thr; });
        EXPECT_EQ(m.outcomes[t], naive_percolates(fam, n, g)) << name << " p=" << p << " t=" << t;
      }
    }
  }
}

TEST(SamplePercolation, EndpointProbabilities) {
  for (const char* name : {"duarte", "r_neighbour(1)", "r_neighbour(3)"}) {
    const UpdateFamily fam = builtin_family(name);
    EXPECT_EQ(sample_percolation({fam, 16, 1.0, 20, 3}).fraction, 1.0);
    EXPECT_EQ(sample_percolation({fam, 16, 0.0, 20, 3}).fraction, 0.0);
  }
}

TEST(SamplePercolation, Preconditions) {
  EXPECT_THROW(sample_percolation({duarte_family(), 1, 0.5, 1, 0}), InvalidArgument);
  EXPECT_THROW(sample_percolation({duarte_family(), 8, 1.5, 1, 0}), InvalidArgument);
}

TEST(SamplePercolation, DeterministicAcrossWorkers) {
  const TrialPlan plan{duarte_family(), 32, 0.2, 64, 2026};
  const RunManifest a = sample_percolation(plan, 1);
  const RunManifest b = sample_percolation(plan, 8);
  EXPECT_EQ(a.outcomes, b.outcomes);
  EXPECT_EQ(a.successes, b.successes);
}

TEST(SamplePercolation, ManifestRoundTripAndReplay) {
  const TrialPlan plan{duarte_family(), 24, 0.22, 40, 0xfeedfacecafebeefULL};
  const RunManifest m = sample_percolation(plan, 2);
  const nlohmann::json j = manifest_to_json(m);
  EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
  const RunManifest back = manifest_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.plan.master_seed, plan.master_seed);
  EXPECT_TRUE(back.plan.family.same_rules(plan.family));
  EXPECT_EQ(back.outcomes, m.outcomes);
  const ReplayResult r = replay(back, 3);
  EXPECT_TRUE(r.identical);
  EXPECT_EQ(r.first_mismatch, -1);

  RunManifest tampered = back;
  tampered.outcomes[5] ^= 1;
  const ReplayResult bad = replay(tampered, 1);
  EXPECT_FALSE(bad.identical);
  EXPECT_EQ(bad.first_mismatch, 5);
}

TEST(Coupling, PathsMonotoneInP) {
  const UpdateFamily fam = duarte_family();
  std::vector<std::uint8_t> prev(50, 0);
  for (double p = 0.0; p <= 1.0001; p += 0.05) {
    auto cur = detail::torus_outcomes(fam, 16, std::min(p, 1.0), 50, 5, 1);
    for (std::size_t t = 0; t < cur.size(); ++t) EXPECT_LE(prev[t], cur[t]) << "p=" << p;
    prev = cur;
  }
}

TEST(EstimatePc, BracketAndLadder) {
  const PcEstimate e = estimate_pc(duarte_family(), 32, 60, std::nullopt, 11, 1);
  EXPECT_FALSE(e.degenerate);
  EXPECT_TRUE(e.path_monotone);
  EXPECT_TRUE(e.probe_monotone);
  EXPECT_LT(e.bracket.hi - e.bracket.lo, default_pc_tolerance(32));
  EXPECT_NEAR(e.p_hat, 0.5 * (e.bracket.lo + e.bracket.hi), 1e-15);
  ASSERT_GE(e.ladder.size(), 2u);
  EXPECT_EQ(e.ladder[0].p, 0.0);
  EXPECT_EQ(e.ladder[0].fraction, 0.0);
  EXPECT_EQ(e.ladder[1].p, 1.0);
  EXPECT_EQ(e.ladder[1].fraction, 1.0);
  for (const auto& pr : e.ladder) {
    if (pr.p <= e.bracket.lo && pr.p > 0) {
      EXPECT_LT(pr.fraction, 0.5);
    }
    if (pr.p >= e.bracket.hi && pr.p < 1) {
      EXPECT_GE(pr.fraction, 0.5);
    }
  }
}

TEST(EstimatePc, DeterministicAndValidated) {
  const PcEstimate a = estimate_pc(r_neighbour_family(2), 16, 40, 0.05, 3, 1);
  const PcEstimate b = estimate_pc(r_neighbour_family(2), 16, 40, 0.05, 3, 4);
  EXPECT_EQ(a.p_hat, b.p_hat);
  EXPECT_EQ(a.ladder.size(), b.ladder.size());
  EXPECT_THROW(estimate_pc(duarte_family(), 16, 10, 0.0, 1), InvalidArgument);
  EXPECT_THROW(estimate_pc(duarte_family(), 16, 0, 0.1, 1), InvalidArgument);
}

TEST(ScalingSweep, RowsAndNormalization) {
  const std::vector<UpdateFamily> fams{duarte_family(), modified_duarte_family()};
  const std::vector<std::int64_t> ns{16, 24};
  const auto rows = scaling_sweep(fams, ns, 30, 8, 1);
  ASSERT_EQ(rows.size(), fams.size() * ns.size());
  for (const auto& r : rows) {
    const double ln = std::log(static_cast<double>(r.n));
    EXPECT_NEAR(r.normalized, r.p_hat * ln / (std::log(ln) * std::log(ln)), 1e-12);
    EXPECT_LE(r.lo, r.p_hat);
    EXPECT_GE(r.hi, r.p_hat);
  }
  EXPECT_EQ(rows[0].family, "duarte");
  EXPECT_EQ(rows[2].family, "modified_duarte");
  EXPECT_THROW(scaling_sweep(fams, {32, 16}, 10, 1), InvalidArgument);
}

bool brute_no_empty_run(const std::vector<std::uint8_t>& line, std::int64_t len) {
  const auto n = static_cast<std::int64_t>(line.size());
  for (std::int64_t s = 0; s < n; ++s) {
    bool any = false;
    for (std::int64_t k = 0; k < len; ++k) any = any || line[(s + k) % n];
    if (!any) return false;
  }
  return true;
}

TEST(NoEmptyLine, RunCheckMatchesBruteForce) {
  std::mt19937 rng(4);
  for (int it = 0; it < 3000; ++it) {
    const int n = 2 + static_cast<int>(rng() % 12);
    std::vector<std::uint8_t> line(n);
    const unsigned density = 1 + rng() % 4;
    for (auto& c : line) c = rng() % 5 < density ? 0 : 1;
    const std::int64_t len = 1 + static_cast<std::int64_t>(rng() % n);
    EXPECT_EQ(detail::line_has_no_empty_run(line, len), brute_no_empty_run(line, len));
  }
}

TEST(NoEmptyLine, EndpointsAndBound) {
  EXPECT_EQ(no_empty_line_check(20, 1.0, 1, 10).fraction, 1.0);
  EXPECT_EQ(no_empty_line_check(20, 0.0, 1, 10).fraction, 0.0);
  const LineCheck lc = no_empty_line_check(64, 0.3, 9, 50);
  EXPECT_EQ(lc.run_length, 38);
  EXPECT_NEAR(lc.bound, 1 - 2.0 * 64 * 64 * std::pow(0.7, 1 / 0.027), 1e-12);
  EXPECT_GE(lc.fraction, 0.0);
  EXPECT_THROW(no_empty_line_check(30, 0.3, 1, 10), InvalidArgument);
}

TEST(Growth, EpsilonReplacedAndGeometry) {
  const GrowthPlan g = growth_plan(0.3, 0.15);
  EXPECT_EQ(g.k, 4);
  EXPECT_DOUBLE_EQ(g.epsilon, 0.25);
  EXPECT_NEAR(g.h, 0.25 / 0.15 * std::log(1 / 0.15), 1e-12);
  ASSERT_EQ(g.events.size(), 1u + 2 * 4 + 4);
  EXPECT_EQ(g.events[0].name, "r0_fill");
  EXPECT_EQ(g.events[0].rect.width(), 1);
  std::int64_t prev_right = 0;
  for (int i = 1; i <= g.k; ++i) {
    const GrowthEvent& right = g.events[2 * i - 1];
    const GrowthEvent& up = g.events[2 * i];
    EXPECT_EQ(right.name, "right_" + std::to_string(i));
    EXPECT_EQ(right.rect.x_min, prev_right + 1);
    EXPECT_EQ(right.rect.y_max, static_cast<std::int64_t>(std::floor(i * g.h)));
    EXPECT_EQ(up.rect_prime.y_max, static_cast<std::int64_t>(std::floor((i + 1) * g.h)));
    EXPECT_EQ(up.rect_prime.x_min, right.rect.x_min);
    EXPECT_EQ(up.rect_prime.x_max, right.rect.x_max);
    EXPECT_NEAR(right.rect_real.x1 - right.rect_real.x0 + 1, std::pow(0.15, -1 - i * 0.25), 1e-9);
    prev_right = right.rect.x_max;
  }
  EXPECT_EQ(g.events.back().name, "r_up");
  EXPECT_EQ(g.events.back().rect.x_max, static_cast<std::int64_t>(std::floor(std::pow(0.15, -5))));
  EXPECT_EQ(g.events.back().rect.y_max, static_cast<std::int64_t>(std::floor(std::pow(0.15, -3))));
}

TEST(Growth, MemoryGuard) { EXPECT_THROW(growth_plan(0.25, 0.05), BudgetExceeded); }

TEST(Growth, FullyInfectedFreshRegionAlwaysSucceeds) {
  const GrowthPlan g = growth_plan(0.5, 0.3);
  for (std::size_t i = 0; i < g.events.size(); ++i) {
    const GrowthStageReport r = run_growth_event(g.events[i], 1.0, 3, 1, i, 1);
    EXPECT_EQ(r.emp, 1.0) << g.events[i].name;
  }
}

// Rightward events succeed exactly when every fresh column has a seed, so the
// rounded bound is the exact probability there.
TEST(Growth, RightwardFrequencyMatchesExactProbability) {
  const double p = 0.3;
  const GrowthPlan g = growth_plan(0.5, p);
  for (std::size_t i = 0; i < g.events.size(); ++i) {
    const GrowthEvent& e = g.events[i];
    if (e.name.rfind("right_", 0) != 0) continue;
    const double exact = std::pow(1 - std::pow(1 - p, e.rect.height()), e.rect.width());
    EXPECT_DOUBLE_EQ(e.bound, exact);
    const GrowthStageReport r = run_growth_event(e, p, 3000, 17, i, 1);
    const double sigma = std::sqrt(exact * (1 - exact) / 3000);
    EXPECT_NEAR(r.emp, exact, 4 * sigma + 1e-12) << e.name;
  }
}

TEST(Growth, DeterministicAcrossWorkers) {
  const GrowthPlan g = growth_plan(0.5, 0.3);
  for (std::size_t i : {std::size_t{2}, g.events.size() - 1}) {
    const auto a = run_growth_event(g.events[i], 0.3, 20, 5, i, 1);
    const auto b = run_growth_event(g.events[i], 0.3, 20, 5, i, 8);
    EXPECT_EQ(a.successes, b.successes);
  }
}

TEST(Growth, ReportsFlagShortfall) {
  GrowthEvent e = growth_plan(0.5, 0.3).events[1];
  e.bound = 1.0;
  const GrowthStageReport r = run_growth_event(e, 0.3, 50, 2, 1, 1);
  EXPECT_EQ(r.sigma, 0.0);
  EXPECT_EQ(r.pass, r.emp >= 1.0);
}

TEST(Mechanisms, ColumnFillFromOneSeed) {
  for (std::int64_t h = 1; h <= 20; ++h)
    for (std::int64_t y = 0; y < h; ++y) EXPECT_TRUE(column_fill_mechanism(h, y)) << h << " " << y;
}

TEST(Mechanisms, TwoRowFill) {
  for (std::int64_t w = 1; w <= 12; ++w)
    for (std::int64_t top = 0; top <= 4; ++top)
      for (std::int64_t x0 = 0; x0 < w; ++x0) EXPECT_TRUE(two_row_mechanism({0, 0, w - 1, top}, x0));
}

TEST(Mechanisms, SeedThreeRowsUpDoesNothing) {
  std::vector<Site> seeds;
  for (std::int64_t x = 0; x < 6; ++x)
    for (std::int64_t y = 0; y <= 2; ++y) seeds.push_back({x, y});
  seeds.push_back({2, 5});
  const LatticeState c = closure_in_window(seeds, duarte_family(), Box{0, 0, 5, 5});
  EXPECT_EQ(c.count(), static_cast<std::int64_t>(seeds.size()));
}

}  // namespace
}  // namespace bootlab
