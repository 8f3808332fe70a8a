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
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bootlab/droplet.hpp"
#include "bootlab/dynamics.hpp"
#include "bootlab/error.hpp"
#include "bootlab/family.hpp"
#include "bootlab/lattice.hpp"
#include "bootlab/site.hpp"
#include "bootlab/union_find.hpp"

namespace bootlab {

// |dx| <= 1 and |dx| + |dy| <= 2. One orientation of each edge.
inline constexpr Site kStrongForward[] = {{0, 1}, {0, 2}, {1, -1}, {1, 0}, {1, 1}};

inline bool strongly_adjacent(Site p, Site q) {
  const std::int64_t dx = std::abs(p.x - q.x), dy = std::abs(p.y - q.y);
  return dx <= 1 && dx + dy <= 2;
}

// Strongly connected components, each sorted, ordered by their least site.
inline std::vector<std::vector<Site>> strong_components(std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  const std::size_t n = sites.size();
  UnionFind uf(n);
  const Box box = bounding_box(sites);
  const std::int64_t area = box.empty() ? 0 : box.width() * box.height();
  if (area > 0 && area <= (std::int64_t{1} << 24)) {
    std::vector<std::int64_t> grid(static_cast<std::size_t>(area), -1);
    auto cell = [&](Site s) {
      return static_cast<std::size_t>((s.y - box.y_min) * box.width() + (s.x - box.x_min));
    };
    for (std::size_t i = 0; i < n; ++i) grid[cell(sites[i])] = static_cast<std::int64_t>(i);
    for (std::size_t i = 0; i < n; ++i) {
      for (Site d : kStrongForward) {
        const Site t = sites[i] + d;
        if (!box.contains(t)) continue;
        const std::int64_t j = grid[cell(t)];
        if (j >= 0) uf.unite(i, static_cast<std::size_t>(j));
      }
    }
  } else {
    std::unordered_map<Site, std::size_t, SiteHash> index;
    for (std::size_t i = 0; i < n; ++i) index.emplace(sites[i], i);
    for (std::size_t i = 0; i < n; ++i) {
      for (Site d : kStrongForward) {
        auto it = index.find(sites[i] + d);
        if (it != index.end()) uf.unite(i, it->second);
      }
    }
  }
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::vector<Site>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    auto [it, fresh] = slot.emplace(r, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(sites[i]);
  }
  return out;
}

inline bool strongly_connected(const std::vector<Site>& sites) {
  return strong_components(sites).size() <= 1;
}

// Closure of a finite set in Z^2. The window around the seeds grows until no
// infected site comes within the family reach of its border.
inline std::vector<Site> finite_closure(const std::vector<Site>& seeds, const UpdateFamily& family,
                                        std::int64_t pad_cap = std::int64_t{1} << 14) {
  if (seeds.empty()) return {};
  const Box core = bounding_box(seeds);
  const std::int64_t reach = family.reach();
  for (std::int64_t pad = std::max<std::int64_t>(1, family.diameter()); pad <= pad_cap; pad *= 2) {
    const Box window = core.padded(pad);
    const LatticeState c = closure_in_window(seeds, family, window);
    const Box inner = window.padded(-reach);
    std::vector<Site> sites = c.sites();
    const bool touches = std::any_of(sites.begin(), sites.end(), [&](Site s) { return !inner.contains(s); });
    if (!touches) {
      std::sort(sites.begin(), sites.end());
      return sites;
    }
  }
  throw BudgetExceeded("closure kept reaching the window border up to the pad cap");
}

struct SpanComponent {
  std::vector<Site> seeds;    // sorted
  std::vector<Site> closure;  // sorted
  Box box;
  Droplet droplet;

  LatticeState closure_state() const { return LatticeState(Geometry::window(box), closure); }
};

struct SpanNode {
  SpanComponent component;
  std::optional<std::pair<std::size_t, std::size_t>> children;
};

// Merge forest. Leaves come first in seed order; internal nodes follow in the
// order the merges happened.
struct SpanTrace {
  std::vector<SpanNode> nodes;
  std::vector<std::size_t> roots;
  std::size_t leaves = 0;
};

struct SpanResult {
  std::vector<Droplet> droplets;
  SpanTrace trace;
};

struct SpanOptions {
  std::int64_t pad_cap = std::int64_t{1} << 14;
  // When set, each step fuses the first eligible pair of a random pair order.
  std::optional<std::uint64_t> shuffle_seed;
};

namespace detail {

inline SpanComponent make_component(std::vector<Site> seeds, std::vector<Site> closure, const GrowthParams& g) {
  SpanComponent c;
  c.seeds = std::move(seeds);
  c.closure = std::move(closure);
  c.box = bounding_box(c.closure);
  c.droplet = droplet_of(g, c.closure);
  return c;
}

}  // namespace detail

inline SpanResult span(std::vector<Site> seeds, const UpdateFamily& family, const GrowthParams& params,
                       const SpanOptions& opts = {}) {
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  SpanResult out;
  SpanTrace& tr = out.trace;
  for (const Site& s : seeds)
    tr.nodes.push_back({detail::make_component({s}, finite_closure({s}, family, opts.pad_cap), params), {}});
  tr.leaves = tr.nodes.size();

  std::vector<std::size_t> active(tr.leaves);
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::map<std::pair<std::size_t, std::size_t>, bool> eligible;
  const std::int64_t reach_gap = std::max<std::int64_t>(2, family.diameter());
  std::optional<std::mt19937_64> rng;
  if (opts.shuffle_seed) rng.emplace(*opts.shuffle_seed);

  auto joint = [&](std::size_t i, std::size_t j) {
    std::vector<Site> u = tr.nodes[i].component.closure;
    const auto& other = tr.nodes[j].component.closure;
    u.insert(u.end(), other.begin(), other.end());
    return finite_closure(u, family, opts.pad_cap);
  };
  auto check = [&](std::size_t i, std::size_t j) {
    auto key = std::minmax(i, j);
    auto it = eligible.find(key);
    if (it != eligible.end()) return it->second;
    bool ok = false;
    if (chebyshev_gap(tr.nodes[i].component.box, tr.nodes[j].component.box) <= reach_gap)
      ok = strongly_connected(joint(i, j));
    eligible.emplace(key, ok);
    return ok;
  };

  for (;;) {
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) order.push_back({active[x], active[y]});
    if (rng) std::shuffle(order.begin(), order.end(), *rng);
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (const auto& [i, j] : order) {
      if (check(i, j)) {
        pick = std::pair{i, j};
        break;
      }
    }
    if (!pick) break;
    const auto [i, j] = *pick;
    std::vector<Site> merged;
    std::merge(tr.nodes[i].component.seeds.begin(), tr.nodes[i].component.seeds.end(),
               tr.nodes[j].component.seeds.begin(), tr.nodes[j].component.seeds.end(), std::back_inserter(merged));
    tr.nodes.push_back({detail::make_component(std::move(merged), joint(i, j), params), std::pair{i, j}});
    std::erase_if(active, [&](std::size_t v) { return v == i || v == j; });
    active.push_back(tr.nodes.size() - 1);
    std::sort(active.begin(), active.end(), [&](std::size_t p, std::size_t q) {
      return tr.nodes[p].component.seeds.front() < tr.nodes[q].component.seeds.front();
    });
  }
  tr.roots = active;
  for (std::size_t r : active) out.droplets.push_back(tr.nodes[r].component.droplet);
  return out;
}

inline bool same_region(const DuarteRegion& x, const DuarteRegion& y) {
  return std::abs(x.a - y.a) <= kTolerance && std::abs(x.b - y.b) <= kTolerance && std::abs(x.w - y.w) <= kTolerance;
}

inline std::vector<Site> seeds_inside(const Droplet& d, const std::vector<Site>& seeds) {
  std::vector<Site> k;
  for (const Site& s : seeds)
    if (d.region.contains(s)) k.push_back(s);
  return k;
}

namespace detail {

// Root of span(D ∩ seeds) whose droplet is D, if any.
inline std::optional<std::size_t> spanning_root(const SpanResult& r, const Droplet& d, const GrowthParams& g) {
  const auto sites = d.sites();
  if (sites.empty()) return std::nullopt;
  const DuarteRegion canonical = minimal_region(g, sites);
  for (std::size_t root : r.trace.roots)
    if (same_region(r.trace.nodes[root].component.droplet.region, canonical)) return root;
  return std::nullopt;
}

}  // namespace detail

inline bool internally_spanned(const Droplet& d, const std::vector<Site>& seeds, const UpdateFamily& family,
                               const GrowthParams& params) {
  const auto k = seeds_inside(d, seeds);
  if (k.empty()) return false;
  return detail::spanning_root(span(k, family, params), d, params).has_value();
}

inline bool lattice_subset(const Droplet& inner, const Droplet& outer) {
  const auto a = inner.sites(), b = outer.sites();
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct ExtractOptions {
  // Seed subsets of D ∩ A are searched exhaustively up to this many seeds;
  // larger sets only get subsets of at most `partial_size` seeds.
  std::size_t exhaustive_limit = 16;
  std::size_t partial_size = 3;
};

namespace detail {

inline bool next_subset(std::vector<std::size_t>& idx, std::size_t n) {
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

}  // namespace detail

// Internally spanned droplet inside d with height in [k, 2k]. The merge tree
// of span(D ∩ A) is walked depth first from the node realising d, taller
// child first. If no node fits, spans of seed subsets are searched in order
// of size; every internally spanned droplet inside d arises that way.
inline std::optional<Droplet> find_subdroplet(const Droplet& d, const std::vector<Site>& seeds,
                                              const UpdateFamily& family, const GrowthParams& params, double k,
                                              const ExtractOptions& opts = {}) {
  if (!(k >= 1) || k > d.height() + kTolerance) throw InvalidArgument("need 1 <= k <= h(d)");
  const std::vector<Site> inside = seeds_inside(d, seeds);
  const SpanResult r = span(inside, family, params);
  const auto root = detail::spanning_root(r, d, params);
  if (!root) throw InvalidArgument("droplet is not internally spanned");
  auto fits = [&](const Droplet& e) {
    const double h = e.height();
    return h >= k - kTolerance && h <= 2 * k + kTolerance && lattice_subset(e, d) &&
           internally_spanned(e, seeds, family, params);
  };
  std::vector<std::size_t> stack = {*root};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    const SpanNode& node = r.trace.nodes[v];
    if (fits(node.component.droplet)) return node.component.droplet;
    if (node.children) {
      auto [a, b] = *node.children;
      if (r.trace.nodes[a].component.droplet.height() > r.trace.nodes[b].component.droplet.height()) std::swap(a, b);
      stack.push_back(a);
      stack.push_back(b);
    }
  }
  const std::size_t n = inside.size();
  const std::size_t max_size = n <= opts.exhaustive_limit ? n : std::min(n, opts.partial_size);
  for (std::size_t size = 1; size <= max_size; ++size) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
      std::vector<Site> subset;
      for (std::size_t i : idx) subset.push_back(inside[i]);
      const SpanResult sub = span(subset, family, params);
      if (sub.droplets.size() != 1) continue;
      if (fits(sub.droplets.front())) return sub.droplets.front();
    } while (detail::next_subset(idx, n));
  }
  return std::nullopt;
}

inline Droplet extract_subdroplet(const Droplet& d, const std::vector<Site>& seeds, const UpdateFamily& family,
                                  const GrowthParams& params, double k, const ExtractOptions& opts = {}) {
  auto found = find_subdroplet(d, seeds, family, params, k, opts);
  if (!found) throw Error("no internally spanned droplet inside d has height in [k, 2k]");
  return *found;
}

// Least Chebyshev distance between lattice sites of two droplets.
inline std::int64_t droplet_distance(const Droplet& p, const Droplet& q) {
  const auto cp = p.region.columns(), cq = q.region.columns();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const auto& [x1, s1] : cp) {
    for (const auto& [x2, s2] : cq) {
      const std::int64_t dx = std::abs(x1 - x2);
      if (dx >= best) continue;
      std::int64_t dy = 0;
      if (s1.second < s2.first) dy = s2.first - s1.second;
      else if (s2.second < s1.first) dy = s1.first - s2.second;
      best = std::min(best, std::max(dx, dy));
    }
  }
  return best;
}

struct CriticalPair {
  Droplet first, second;
  std::vector<Site> first_seeds, second_seeds;
  std::int64_t distance = 0;
  double merged_height = 0;
};

// The two components fused at the first merge producing a droplet taller
// than the threshold.
inline std::optional<CriticalPair> critical_pair(const std::vector<Site>& seeds, const UpdateFamily& family,
                                                 const GrowthParams& params, double threshold) {
  const SpanResult r = span(seeds, family, params);
  const auto& nodes = r.trace.nodes;
  for (std::size_t v = r.trace.leaves; v < nodes.size(); ++v) {
    const double h = nodes[v].component.droplet.height();
    if (h <= threshold) continue;
    const auto [a, b] = *nodes[v].children;
    CriticalPair cp;
    cp.first = nodes[a].component.droplet;
    cp.second = nodes[b].component.droplet;
    cp.first_seeds = nodes[a].component.seeds;
    cp.second_seeds = nodes[b].component.seeds;
    cp.distance = droplet_distance(cp.first, cp.second);
    cp.merged_height = h;
    if (std::max(cp.first.height(), cp.second.height()) > threshold + kTolerance)
      throw Error("critical pair has a child above the threshold");
    if (cp.first.height() + cp.second.height() < threshold - 1 - kTolerance)
      throw Error("critical pair heights sum below threshold - 1");
    return cp;
  }
  return std::nullopt;
}

inline nlohmann::json site_json(Site s) { return nlohmann::json::array({s.x, s.y}); }

inline nlohmann::json sites_json(const std::vector<Site>& sites) {
  nlohmann::json a = nlohmann::json::array();
  for (const Site& s : sites) a.push_back(site_json(s));
  return a;
}

inline nlohmann::json droplet_json(const Droplet& d) {
  const auto e = d.region.right_edge();
  nlohmann::json j = region_to_json(d.region);
  j["height"] = d.height();
  j["right_edge"] = {{"x", e.x}, {"y_lo", e.y_lo}, {"y_hi", e.y_hi}};
  return j;
}

inline nlohmann::json span_json(const SpanResult& r) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < r.trace.nodes.size(); ++i) {
    const SpanNode& n = r.trace.nodes[i];
    nlohmann::json j = {{"id", i},
                        {"seeds", sites_json(n.component.seeds)},
                        {"closure_size", n.component.closure.size()},
                        {"droplet", droplet_json(n.component.droplet)}};
    if (n.children) j["children"] = {n.children->first, n.children->second};
    nodes.push_back(std::move(j));
  }
  nlohmann::json droplets = nlohmann::json::array();
  for (const Droplet& d : r.droplets) droplets.push_back(droplet_json(d));
  return {{"droplets", droplets}, {"trace", {{"nodes", nodes}, {"roots", r.trace.roots}}}};
}

inline std::string span_dot(const SpanResult& r) {
  std::ostringstream os;
  os << "digraph span {\n";
  for (std::size_t i = 0; i < r.trace.nodes.size(); ++i) {
    const SpanNode& n = r.trace.nodes[i];
    os << "  n" << i << " [label=\"" << i << " h=" << n.component.droplet.height() << " |K|="
       << n.component.seeds.size() << "\"];\n";
    if (n.children) {
      os << "  n" << i << " -> n" << n.children->first << ";\n";
      os << "  n" << i << " -> n" << n.children->second << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace bootlab
