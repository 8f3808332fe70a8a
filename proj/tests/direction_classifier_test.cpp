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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bootlab/direction.hpp"
#include "bootlab/dynamics.hpp"

namespace bootlab {
namespace {

UpdateFamily random_family(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nrules(1, 4), nsites(1, 3), coord(-2, 2);
  std::vector<UpdateRule> rules;
  const int m = nrules(rng);
  for (int i = 0; i < m; ++i) {
    std::vector<Site> offs;
    const int k = nsites(rng);
    while (static_cast<int>(offs.size()) < k) {
      Site s{coord(rng), coord(rng)};
      if (s != Site{0, 0}) offs.push_back(s);
    }
    rules.emplace_back(offs);
  }
  return UpdateFamily(rules, "random");
}

Direction random_direction(std::mt19937_64& rng, int bound) {
  std::uniform_int_distribution<int> c(-bound, bound);
  for (;;) {
    const int a = c(rng), b = c(rng);
    if (a != 0 || b != 0) return {a, b};
  }
}

// The eight symmetries of the square acting on sites.
Site apply_symmetry(int g, Site s) {
  if (g & 4) s = {s.y, s.x};
  if (g & 1) s.x = -s.x;
  if (g & 2) s.y = -s.y;
  return s;
}

UpdateFamily transform(const UpdateFamily& f, int g) {
  std::vector<UpdateRule> rules;
  for (const auto& r : f.rules()) {
    std::vector<Site> offs;
    for (Site s : r.offsets()) offs.push_back(apply_symmetry(g, s));
    rules.emplace_back(offs);
  }
  return UpdateFamily(rules, f.name());
}

Direction transform(const Direction& u, int g) {
  const Site s = apply_symmetry(g, Site{u.a, u.b});
  return {s.x, s.y};
}

// All primitive directions with coordinates bounded by n, in angular order.
std::vector<Direction> farey_circle(int n) {
  std::vector<Direction> out;
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b)
      if ((a != 0 || b != 0) && std::gcd(a, b) == 1) out.emplace_back(a, b);
  std::sort(out.begin(), out.end(), angle_less);
  return out;
}

// Classification by sampling a dense set of rational directions. Coordinates
// of rule sites are at most 2, so every gap between critical directions
// contains several sample points.
Kind sampled_kind(const UpdateFamily& f, const std::vector<Direction>& circle) {
  const std::size_t n = circle.size();
  std::vector<bool> stable(n);
  for (std::size_t i = 0; i < n; ++i) stable[i] = is_stable(f, circle[i]);
  bool super = false, sub = true;
  for (const Direction& c : circle) {
    bool any = false, pair = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      if (cross(c, circle[i]) <= 0) continue;
      any = any || stable[i];
      if (cross(c, circle[j]) > 0 && stable[i] && stable[j]) pair = true;
    }
    if (!any) super = true;
    if (!pair) sub = false;
  }
  return super ? Kind::supercritical : (sub ? Kind::subcritical : Kind::critical);
}

TEST(Direction, CanonicalForm) {
  const Direction d(4, -6);
  EXPECT_EQ(d, Direction(2, -3));
  EXPECT_EQ(Direction(0, -5), Direction(0, -1));
  EXPECT_THROW(Direction(0, 0), InvalidArgument);
}

TEST(Direction, AngularOrder) {
  const std::vector<Direction> ring = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  for (std::size_t i = 0; i < ring.size(); ++i) {
    EXPECT_FALSE(angle_less(ring[i], ring[i]));
    for (std::size_t j = i + 1; j < ring.size(); ++j) {
      EXPECT_TRUE(angle_less(ring[i], ring[j]));
      EXPECT_FALSE(angle_less(ring[j], ring[i]));
    }
  }
  const Arc left{{0, 1}, {0, -1}};
  EXPECT_TRUE(left.contains({-1, 0}));
  EXPECT_TRUE(left.contains({0, 1}));
  EXPECT_TRUE(left.contains({0, -1}));
  EXPECT_FALSE(left.contains({1, 0}));
  EXPECT_FALSE(left.contains({1, 5}));
}

TEST(IsStable, Duarte) {
  const UpdateFamily d = duarte_family();
  EXPECT_TRUE(is_stable(d, {1, 0}));
  EXPECT_FALSE(is_stable(d, {1, 1}));
  EXPECT_TRUE(is_stable(d, {-1, 0}));
  EXPECT_FALSE(is_stable(d, {5, 1}));
  EXPECT_FALSE(is_stable(d, {5, -1}));
  EXPECT_TRUE(is_stable(d, {-3, 7}));
}

TEST(StableSet, Duarte) {
  const StableSet s = stable_set(duarte_family());
  ASSERT_EQ(s.arcs.size(), 1u);
  EXPECT_EQ(s.arcs[0].start, Direction(0, 1));
  EXPECT_EQ(s.arcs[0].end, Direction(0, -1));
  EXPECT_EQ(s.isolated, std::vector<Direction>{Direction(1, 0)});
  EXPECT_FALSE(s.full_circle);
}

TEST(StableSet, ModifiedDuarteIsQuarterTurnOfDuarte) {
  const StableSet s = stable_set(modified_duarte_family());
  ASSERT_EQ(s.arcs.size(), 1u);
  EXPECT_EQ(s.arcs[0].start, Direction(-1, 0));
  EXPECT_EQ(s.arcs[0].end, Direction(1, 0));
  EXPECT_EQ(s.isolated, std::vector<Direction>{Direction(0, 1)});
}

TEST(StableSet, NeighbourFamilies) {
  EXPECT_TRUE(stable_set(r_neighbour_family(1)).empty());
  const StableSet two = stable_set(r_neighbour_family(2));
  EXPECT_TRUE(two.arcs.empty());
  EXPECT_EQ(two.isolated, (std::vector<Direction>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}));
  for (const Direction& u : two.isolated) EXPECT_TRUE(is_stable(r_neighbour_family(2), u));
  for (const Direction& u : {Direction{3, 1}, Direction{3, -1}, Direction{1, 3}, Direction{-1, 3},
                             Direction{-3, 1}, Direction{-3, -1}, Direction{1, -3}, Direction{-1, -3}}) {
    EXPECT_FALSE(is_stable(r_neighbour_family(2), u));
  }
  EXPECT_TRUE(stable_set(r_neighbour_family(3)).full_circle);
  EXPECT_TRUE(stable_set(r_neighbour_family(4)).full_circle);
}

TEST(StableSet, OneNeighbourDenseSample) {
  const UpdateFamily f = r_neighbour_family(1);
  for (const Direction& u : farey_circle(12)) EXPECT_FALSE(is_stable(f, u));
}

TEST(StableSet, AgreesWithPointwiseStability) {
  std::mt19937_64 rng(31);
  std::vector<UpdateFamily> families = {duarte_family(), modified_duarte_family()};
  for (int r = 1; r <= 4; ++r) families.push_back(r_neighbour_family(r));
  for (int i = 0; i < 40; ++i) families.push_back(random_family(rng));
  for (const auto& f : families) {
    const StableSet s = stable_set(f);
    for (int t = 0; t < 1000; ++t) {
      const Direction u = random_direction(rng, t % 2 ? 60 : 4);
      ASSERT_EQ(s.contains(u), is_stable(f, u)) << f.name() << ' ' << u;
    }
    for (const Direction& u : critical_directions(f)) ASSERT_EQ(s.contains(u), is_stable(f, u));
  }
}

TEST(StableSet, CanonicalAndDisjoint) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 300; ++i) {
    const StableSet s = stable_set(random_family(rng));
    for (std::size_t j = 1; j < s.isolated.size(); ++j)
      EXPECT_TRUE(angle_less(s.isolated[j - 1], s.isolated[j]));
    for (std::size_t j = 1; j < s.arcs.size(); ++j)
      EXPECT_TRUE(angle_less(s.arcs[j - 1].start, s.arcs[j].start));
    for (const Arc& a : s.arcs) {
      EXPECT_FALSE(a.start == a.end);
      for (const Arc& b : s.arcs) {
        if (a == b) continue;
        EXPECT_FALSE(b.contains(a.start));
        EXPECT_FALSE(b.contains(a.end));
      }
      for (const Direction& p : s.isolated) EXPECT_FALSE(a.contains(p));
    }
  }
}

TEST(StableSet, SquareSymmetries) {
  std::mt19937_64 rng(33);
  for (int r = 1; r <= 4; ++r) {
    const UpdateFamily f = r_neighbour_family(r);
    for (int g = 0; g < 8; ++g) {
      const StableSet a = stable_set(f), b = stable_set(transform(f, g));
      EXPECT_EQ(a.isolated, b.isolated);
      EXPECT_EQ(a.arcs, b.arcs);
      EXPECT_EQ(a.full_circle, b.full_circle);
    }
  }
  for (int i = 0; i < 100; ++i) {
    const UpdateFamily f = random_family(rng);
    const StableSet s = stable_set(f);
    for (int g = 0; g < 8; ++g) {
      const StableSet sg = stable_set(transform(f, g));
      for (int t = 0; t < 50; ++t) {
        const Direction u = random_direction(rng, 6);
        ASSERT_EQ(s.contains(u), sg.contains(transform(u, g)));
      }
    }
  }
}

TEST(DifficultyValue, Lattice) {
  using D = DifficultyValue;
  EXPECT_EQ(dmax(D::finite(1), D::finite(3)), D::finite(3));
  EXPECT_EQ(dmax(D::finite(1), D::infinite()), D::infinite());
  EXPECT_EQ(dmax(D::finite(5), D::unknown_at_least(4)), D::unknown_at_least(5));
  EXPECT_EQ(dmin(D::finite(2), D::unknown_at_least(4)), D::finite(2));
  EXPECT_EQ(dmin(D::finite(6), D::unknown_at_least(4)), D::unknown_at_least(4));
  EXPECT_EQ(dmin(D::infinite(), D::finite(4)), D::finite(4));
  EXPECT_EQ(combine_sides(D::finite(1), D::infinite()), D::infinite());
  EXPECT_EQ(combine_sides(D::finite(1), D::finite(2)), D::finite(1));
  EXPECT_EQ(dle(D::infinite(), D::finite(1)), Tri::no);
  EXPECT_EQ(dle(D::finite(1), D::unknown_at_least(3)), Tri::yes);
  EXPECT_EQ(dle(D::unknown_at_least(2), D::finite(4)), Tri::unknown);
}

TEST(Difficulty, DuarteIsolatedDirection) {
  const DifficultyReport rep = difficulty_report(duarte_family(), {1, 0}, {3, 12});
  EXPECT_EQ(rep.plus.value, DifficultyValue::finite(1));
  EXPECT_EQ(rep.minus.value, DifficultyValue::finite(1));
  EXPECT_EQ(rep.combined.value, DifficultyValue::finite(1));
  EXPECT_EQ(rep.combined.witness, std::vector<Site>{Site(0, 0)});
}

TEST(Difficulty, DuarteArcDirectionsAreInfinite) {
  for (const Direction& u : {Direction{0, 1}, Direction{0, -1}, Direction{-1, 0}, Direction{-2, 5}})
    EXPECT_TRUE(difficulty(duarte_family(), u).value.is_infinite()) << u;
}

TEST(Difficulty, UnstableIsZero) {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 50; ++i) {
    const UpdateFamily f = random_family(rng);
    for (int t = 0; t < 20; ++t) {
      const Direction u = random_direction(rng, 5);
      if (is_stable(f, u)) continue;
      EXPECT_EQ(difficulty(f, u).value, DifficultyValue::finite(0));
    }
  }
}

TEST(Difficulty, TwoNeighbour) {
  for (const Direction& u : {Direction{1, 0}, Direction{0, 1}, Direction{-1, 0}, Direction{0, -1}}) {
    EXPECT_EQ(difficulty(r_neighbour_family(2), u, {3, 12}).value, DifficultyValue::finite(1)) << u;
  }
}

// Replays a witness through an independent window closure and checks that a
// line site far from every helper on the reported side is infected.
bool replay(const UpdateFamily& f, const Direction& u, const DifficultyEstimate& est) {
  const std::int64_t r = est.budget.window_radius;
  const std::int64_t half = r + 2 * f.diameter();
  std::vector<Site> seeds = est.witness;
  for (std::int64_t y = -half; y <= half; ++y)
    for (std::int64_t x = -half; x <= half; ++x)
      if (u.a * x + u.b * y < 0) seeds.push_back({x, y});
  const LatticeState c = closure_in_window(seeds, f, {-half, -half, half, half});
  for (std::int64_t m = -half; m <= half; ++m) {
    const Site s{m * u.b, -m * u.a};
    if (!c.test(s)) continue;
    if (est.side == Side::plus && m <= 0) continue;
    if (est.side == Side::minus && m >= 0) continue;
    bool far = true;
    for (Site h : est.witness) {
      const double d = std::hypot(double(s.x - h.x), double(s.y - h.y));
      if (d <= r / 2.0) far = false;
    }
    if (far) return true;
  }
  return false;
}

TEST(Difficulty, WitnessesReplay) {
  std::mt19937_64 rng(35);
  int checked = 0;
  std::vector<UpdateFamily> families = {duarte_family(), modified_duarte_family(), r_neighbour_family(2)};
  for (int i = 0; i < 60; ++i) families.push_back(random_family(rng));
  for (const auto& f : families) {
    for (const Direction& u : stable_set(f).isolated) {
      const DifficultyReport rep = difficulty_report(f, u, {2, 10});
      for (const DifficultyEstimate* e : {&rep.plus, &rep.minus}) {
        if (!e->value.is_finite()) continue;
        EXPECT_EQ(static_cast<std::int64_t>(e->witness.size()), e->value.k);
        EXPECT_TRUE(replay(f, u, *e)) << f.name() << ' ' << u;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Classify, Examples) {
  const Classification d = classify(duarte_family());
  EXPECT_EQ(d.kind, Kind::critical);
  EXPECT_EQ(d.balance, Balance::unbalanced);
  EXPECT_EQ(d.alpha, DifficultyValue::finite(1));

  const Classification m = classify(modified_duarte_family());
  EXPECT_EQ(m.kind, Kind::critical);
  EXPECT_EQ(m.balance, Balance::unbalanced);
  EXPECT_EQ(m.alpha, DifficultyValue::finite(1));

  EXPECT_EQ(classify(r_neighbour_family(1)).kind, Kind::supercritical);
  EXPECT_EQ(classify(r_neighbour_family(1)).balance, Balance::not_applicable);
  EXPECT_EQ(classify(r_neighbour_family(3)).kind, Kind::subcritical);
  EXPECT_EQ(classify(r_neighbour_family(4)).kind, Kind::subcritical);

  const Classification two = classify(r_neighbour_family(2));
  EXPECT_EQ(two.kind, Kind::critical);
  EXPECT_EQ(two.balance, Balance::balanced);
  EXPECT_EQ(two.alpha, DifficultyValue::finite(1));
  ASSERT_TRUE(two.balancing_semicircle.has_value());
}

TEST(Classify, KindMatchesSampledOracle) {
  std::mt19937_64 rng(36);
  const std::vector<Direction> circle = farey_circle(7);
  for (int i = 0; i < 300; ++i) {
    const UpdateFamily f = random_family(rng);
    ASSERT_EQ(classify(f, {1, 8}).kind, sampled_kind(f, circle)) << i;
  }
}

TEST(Classify, AlphaMatchesSampledSemicircles) {
  std::mt19937_64 rng(37);
  const std::vector<Direction> circle = farey_circle(7);
  for (int i = 0; i < 60; ++i) {
    const UpdateFamily f = random_family(rng);
    const Classification c = classify(f, {2, 8});
    if (c.kind != Kind::critical) continue;
    DifficultyValue best = DifficultyValue::infinite();
    for (const Direction& b : circle) {
      DifficultyValue worst = DifficultyValue::finite(0);
      for (const Direction& u : circle) {
        if (cross(b, u) <= 0 || !is_stable(f, u)) continue;
        if (c.stable.in_arc(u)) {
          worst = DifficultyValue::infinite();
          break;
        }
        for (const auto& iso : c.isolated)
          if (iso.u == u) worst = dmax(worst, iso.report.combined.value);
      }
      best = dmin(best, worst);
    }
    EXPECT_EQ(c.alpha, best) << i;
  }
}

}  // namespace
}  // namespace bootlab
