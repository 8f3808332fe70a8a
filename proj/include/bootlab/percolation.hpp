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
#include "bootlab/stats.hpp"
#include "bootlab/version.hpp"

namespace bootlab {

struct TrialPlan {
  UpdateFamily family;
  std::int64_t n = 64;
  double p = 0.1;
  std::int64_t trials = 100;
  std::uint64_t master_seed = 0;
};

struct RunManifest {
  TrialPlan plan;
  std::string artifact_version = kArtifactVersion;
  std::string timestamp;
  std::vector<std::uint8_t> outcomes;
  std::int64_t successes = 0;
  double fraction = 0;
  Interval interval;
};

namespace detail {

inline void validate_lattice(std::int64_t n, double p) {
  if (n < 2) throw InvalidArgument("torus side must be at least 2");
  if (!(p >= 0 && p <= 1)) throw InvalidArgument("p must lie in [0,1]");
}

// Loads trial `trial`'s p-random set into a torus kernel.
inline void load_torus_trial(ClosureKernel& kernel, std::int64_t n, std::uint64_t seed, std::uint64_t trial,
                             std::uint64_t threshold) {
  const SiteUniforms uniforms(seed, trial);
  const auto un = static_cast<std::uint64_t>(n);
  std::uint8_t* row = kernel.row(0);
  std::uint64_t x = 0, y = 0;
  uniforms.fill(un * un, [&](std::uint64_t, std::uint32_t u) {
    row[x] = u < threshold ? ClosureKernel::kInfected : ClosureKernel::kHealthy;
    if (++x == un) {
      x = 0;
      if (++y < un) row = kernel.row(static_cast<std::int64_t>(y));
    }
  });
}

// Percolation indicators for trials [0, trials) at probability p.
inline std::vector<std::uint8_t> torus_outcomes(const UpdateFamily& family, std::int64_t n, double p,
                                                std::int64_t trials, std::uint64_t seed, unsigned workers) {
  validate_lattice(n, p);
  if (trials < 0) throw InvalidArgument("trial count must be nonnegative");
  const std::uint64_t threshold = infection_threshold(p);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(trials), 0);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::int64_t>(trials, 1))));
  std::vector<std::optional<ClosureKernel>> kernels(workers);
  parallel_for(trials, workers, [&](std::int64_t t, unsigned w) {
    if (!kernels[w]) kernels[w].emplace(family, Geometry::torus(n));
    ClosureKernel& k = *kernels[w];
    load_torus_trial(k, n, seed, static_cast<std::uint64_t>(t), threshold);
    k.run();
    out[static_cast<std::size_t>(t)] = k.count() == n * n;
  });
  return out;
}

}  // namespace detail

inline RunManifest sample_percolation(const TrialPlan& plan, std::optional<unsigned> workers = std::nullopt) {
  RunManifest m;
  m.plan = plan;
  m.timestamp = utc_timestamp();
  m.outcomes = detail::torus_outcomes(plan.family, plan.n, plan.p, plan.trials, plan.master_seed,
                                      resolve_workers(workers));
  for (auto o : m.outcomes) m.successes += o;
  m.fraction = plan.trials > 0 ? static_cast<double>(m.successes) / static_cast<double>(plan.trials) : 0.0;
  m.interval = wilson_interval(m.successes, plan.trials);
  return m;
}

inline nlohmann::json plan_to_json(const TrialPlan& plan) {
  return {{"family", family_to_json(plan.family)},
          {"n", plan.n},
          {"p", plan.p},
          {"trials", plan.trials},
          {"master_seed", plan.master_seed}};
}

inline TrialPlan plan_from_json(const nlohmann::json& j) {
  try {
    TrialPlan plan;
    plan.family = family_from_json(j.at("family"));
    plan.n = j.at("n").get<std::int64_t>();
    plan.p = j.at("p").get<double>();
    plan.trials = j.at("trials").get<std::int64_t>();
    plan.master_seed = j.at("master_seed").get<std::uint64_t>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed trial plan: ") + e.what());
  }
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  std::string bits;
  bits.reserve(m.outcomes.size());
  for (auto o : m.outcomes) bits.push_back(o ? '1' : '0');
  return {{"schema_version", kSchemaVersion},
          {"artifact_version", m.artifact_version},
          {"generator", kGeneratorName},
          {"timestamp", m.timestamp},
          {"plan", plan_to_json(m.plan)},
          {"outcomes", bits},
          {"successes", m.successes},
          {"fraction", m.fraction},
          {"interval", {{"lo", m.interval.lo}, {"hi", m.interval.hi}}}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.plan = plan_from_json(j.at("plan"));
    m.artifact_version = j.value("artifact_version", std::string{});
    m.timestamp = j.value("timestamp", std::string{});
    for (char c : j.at("outcomes").get<std::string>()) {
      if (c != '0' && c != '1') throw InvalidArgument("outcomes must be a 0/1 string");
      m.outcomes.push_back(c == '1');
    }
    m.successes = j.at("successes").get<std::int64_t>();
    m.fraction = j.at("fraction").get<double>();
    m.interval = {j.at("interval").at("lo").get<double>(), j.at("interval").at("hi").get<double>()};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
}

struct ReplayResult {
  RunManifest rerun;
  bool identical = false;
  std::int64_t first_mismatch = -1;
};

inline ReplayResult replay(const RunManifest& recorded, std::optional<unsigned> workers = std::nullopt) {
  ReplayResult r;
  r.rerun = sample_percolation(recorded.plan, workers);
  r.identical = r.rerun.outcomes == recorded.outcomes;
  if (!r.identical) {
    const auto n = std::min(r.rerun.outcomes.size(), recorded.outcomes.size());
    r.first_mismatch = static_cast<std::int64_t>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.rerun.outcomes[i] != recorded.outcomes[i]) {
        r.first_mismatch = static_cast<std::int64_t>(i);
        break;
      }
    }
  }
  return r;
}

struct Probe {
  double p = 0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double fraction = 0;
  Interval interval;
};

struct PcEstimate {
  double p_hat = 0;
  Interval bracket;
  std::vector<Probe> ladder;
  bool degenerate = false;
  // Every coupled path is nondecreasing in p across the ladder.
  bool path_monotone = true;
  // No probe fraction drops below a lower-p one by more than the two radii.
  bool probe_monotone = true;
  double radius() const { return bracket.radius(); }
};

inline double default_pc_tolerance(std::int64_t n) { return 1.0 / (4.0 * std::log(static_cast<double>(n))); }

// Bisection for the p at which the percolation fraction crosses 1/2. All
// probes reuse trial t's per-site uniforms, so each path is monotone in p.
inline PcEstimate estimate_pc(const UpdateFamily& family, std::int64_t n, std::int64_t trials_per_probe,
                              std::optional<double> tolerance, std::uint64_t master_seed,
                              std::optional<unsigned> workers = std::nullopt) {
  const double tol = tolerance.value_or(default_pc_tolerance(n));
  if (!(tol > 0)) throw InvalidArgument("tolerance must be positive");
  if (trials_per_probe < 1) throw InvalidArgument("need at least one trial per probe");
  detail::validate_lattice(n, 0.5);
  const unsigned nw = resolve_workers(workers);

  PcEstimate est;
  std::vector<std::vector<std::uint8_t>> paths;
  auto probe = [&](double p) {
    auto out = detail::torus_outcomes(family, n, p, trials_per_probe, master_seed, nw);
    Probe pr;
    pr.p = p;
    pr.trials = trials_per_probe;
    for (auto o : out) pr.successes += o;
    pr.fraction = static_cast<double>(pr.successes) / static_cast<double>(pr.trials);
    pr.interval = wilson_interval(pr.successes, pr.trials);
    est.ladder.push_back(pr);
    paths.push_back(std::move(out));
    return pr.fraction;
  };

  double lo = 0, hi = 1;
  const double f_lo = probe(lo);
  const double f_hi = probe(hi);
  if (f_lo >= 0.5 || f_hi < 0.5) {
    est.degenerate = true;
    est.p_hat = f_lo >= 0.5 ? 0.0 : 1.0;
    est.bracket = {est.p_hat, est.p_hat};
  } else {
    while (hi - lo >= tol) {
      const double mid = 0.5 * (lo + hi);
      if (probe(mid) >= 0.5) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    est.bracket = {lo, hi};
    est.p_hat = 0.5 * (lo + hi);
  }

  std::vector<std::size_t> order(est.ladder.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return est.ladder[a].p < est.ladder[b].p; });
  for (std::size_t j = 1; j < order.size(); ++j) {
    const auto& a = est.ladder[order[j - 1]];
    const auto& b = est.ladder[order[j]];
    for (std::int64_t t = 0; t < trials_per_probe; ++t) {
      if (paths[order[j - 1]][static_cast<std::size_t>(t)] > paths[order[j]][static_cast<std::size_t>(t)])
        est.path_monotone = false;
    }
    if (a.fraction - b.fraction > a.interval.radius() + b.interval.radius()) est.probe_monotone = false;
  }
  return est;
}

inline nlohmann::json pc_estimate_to_json(const PcEstimate& e) {
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& pr : e.ladder) {
    ladder.push_back({{"p", pr.p},
                      {"successes", pr.successes},
                      {"trials", pr.trials},
                      {"fraction", pr.fraction},
                      {"lo", pr.interval.lo},
                      {"hi", pr.interval.hi}});
  }
  return {{"p_hat", e.p_hat},
          {"bracket", {{"lo", e.bracket.lo}, {"hi", e.bracket.hi}}},
          {"radius", e.radius()},
          {"degenerate", e.degenerate},
          {"path_monotone", e.path_monotone},
          {"probe_monotone", e.probe_monotone},
          {"ladder", std::move(ladder)}};
}

struct SweepRow {
  std::string family;
  std::int64_t n = 0;
  double p_hat = 0;
  double lo = 0;
  double hi = 0;
  double normalized = 0;
  PcEstimate estimate;
};

inline double normalize_pc(double p_hat, std::int64_t n) {
  const double ln = std::log(static_cast<double>(n));
  const double lln = std::log(ln);
  return p_hat * ln / (lln * lln);
}

// Rows are grouped by family, in the order given, then by n.
inline std::vector<SweepRow> scaling_sweep(const std::vector<UpdateFamily>& families,
                                           const std::vector<std::int64_t>& n_list, std::int64_t trials,
                                           std::uint64_t seed, std::optional<unsigned> workers = std::nullopt) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw InvalidArgument("n_list must be nondecreasing");
  for (auto n : n_list)
    if (n < 3) throw InvalidArgument("sweep sizes must be at least 3");
  std::vector<SweepRow> rows;
  for (const auto& family : families) {
    for (auto n : n_list) {
      SweepRow row;
      row.family = family.name();
      row.n = n;
      row.estimate = estimate_pc(family, n, trials, std::nullopt, seed, workers);
      row.p_hat = row.estimate.p_hat;
      row.lo = row.estimate.bracket.lo;
      row.hi = row.estimate.bracket.hi;
      row.normalized = normalize_pc(row.p_hat, n);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

struct LineCheck {
  std::int64_t n = 0;
  double p = 0;
  std::int64_t run_length = 0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double fraction = 0;
  Interval interval;
  double bound = 0;
};

namespace detail {

// True iff every cyclic run of `len` consecutive cells of the line has an
// infected cell, that is the longest cyclic gap is shorter than len.
inline bool line_has_no_empty_run(const std::vector<std::uint8_t>& line, std::int64_t len) {
  const auto n = static_cast<std::int64_t>(line.size());
  std::int64_t first = -1;
  for (std::int64_t i = 0; i < n; ++i) {
    if (line[static_cast<std::size_t>(i)]) {
      first = i;
      break;
    }
  }
  if (first < 0) return false;
  std::int64_t gap = 0;
  for (std::int64_t k = 1; k <= n; ++k) {
    if (line[static_cast<std::size_t>((first + k) % n)]) {
      if (gap >= len) return false;
      gap = 0;
    } else {
      ++gap;
    }
  }
  return true;
}

}  // namespace detail

inline LineCheck no_empty_line_check(std::int64_t n, double p, std::uint64_t seed, std::int64_t trials,
                                     std::optional<unsigned> workers = std::nullopt) {
  detail::validate_lattice(n, p);
  if (trials < 1) throw InvalidArgument("need at least one trial");
  LineCheck lc;
  lc.n = n;
  lc.p = p;
  lc.trials = trials;
  if (p > 0) {
    const double inv = 1.0 / (p * p * p);
    if (!(inv < static_cast<double>(n))) throw InvalidArgument("need 1/p^3 < n");
    lc.run_length = static_cast<std::int64_t>(std::ceil(inv));
    lc.bound = 1.0 - 2.0 * static_cast<double>(n) * static_cast<double>(n) * std::pow(1.0 - p, inv);
  } else {
    lc.run_length = n;
    lc.bound = 1.0 - 2.0 * static_cast<double>(n) * static_cast<double>(n);
  }
  const std::uint64_t threshold = infection_threshold(p);
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(trials), 0);
  const auto un = static_cast<std::uint64_t>(n);
  parallel_for(trials, resolve_workers(workers), [&](std::int64_t t, unsigned) {
    std::vector<std::uint8_t> grid(static_cast<std::size_t>(un * un));
    SiteUniforms(seed, static_cast<std::uint64_t>(t)).fill(un * un, [&](std::uint64_t i, std::uint32_t u) {
      grid[i] = u < threshold;
    });
    std::vector<std::uint8_t> line(static_cast<std::size_t>(n));
    bool good = true;
    for (std::uint64_t r = 0; r < un && good; ++r) {
      for (std::uint64_t c = 0; c < un; ++c) line[c] = grid[r * un + c];
      good = detail::line_has_no_empty_run(line, lc.run_length);
      for (std::uint64_t c = 0; c < un && good; ++c) line[c] = grid[c * un + r];
      if (good) good = detail::line_has_no_empty_run(line, lc.run_length);
    }
    ok[static_cast<std::size_t>(t)] = good;
  });
  for (auto o : ok) lc.successes += o;
  lc.fraction = static_cast<double>(lc.successes) / static_cast<double>(trials);
  lc.interval = wilson_interval(lc.successes, trials);
  return lc;
}

}  // namespace bootlab
