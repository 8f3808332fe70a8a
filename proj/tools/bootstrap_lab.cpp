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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bootlab.hpp"

namespace {

using bootlab::UpdateFamily;
using nlohmann::json;

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

std::vector<bootlab::Site> parse_sites(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw bootlab::InvalidArgument(std::string("malformed site list: ") + e.what());
  }
  if (!j.is_array()) throw bootlab::InvalidArgument("site list must be a JSON array of [x,y] pairs");
  std::vector<bootlab::Site> out;
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
      throw bootlab::InvalidArgument("site list must be a JSON array of [x,y] pairs");
    out.push_back({s[0].get<std::int64_t>(), s[1].get<std::int64_t>()});
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw bootlab::Error("cannot open " + path + " for writing");
  f << text;
}

json envelope(const std::string& sub, json config) {
  return {{"schema_version", bootlab::kSchemaVersion},
          {"artifact_version", bootlab::kArtifactVersion},
          {"subcommand", sub},
          {"config", std::move(config)}};
}

void emit(const std::string& out, const json& j) { write_text(out, j.dump(2) + "\n"); }

void write_manifest(const std::string& dir, const std::string& sub, std::uint64_t seed, const json& j) {
  if (dir.empty()) return;
  write_text(dir + "/" + sub + "-" + std::to_string(seed) + ".json", j.dump(2) + "\n");
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone cellular automata lab: classification, closures, droplets and percolation experiments.",
               "bootstrap_lab"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.set_version_flag("--version", std::string(bootlab::kArtifactVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string family_text = "duarte";
  std::string out;
  std::optional<unsigned> workers;
  std::string manifest_dir;
  std::uint64_t seed = 0;

  // classify
  auto* classify = app.add_subcommand("classify", "Stable set, class, balance and difficulty of a family");
  int max_helpers = 3, window_radius = 12;
  classify->add_option("--family", family_text, "Builtin name or inline JSON family")->required();
  classify->add_option("--max-helpers", max_helpers, "Difficulty search helper budget")->capture_default_str();
  classify->add_option("--window-radius", window_radius, "Difficulty search window radius")->capture_default_str();
  classify->add_option("--out", out, "Output path (default stdout)");

  // closure
  auto* closure_cmd = app.add_subcommand("closure", "Closure of a finite seed set on a torus or in a window");
  std::string seeds_text;
  std::optional<std::int64_t> torus_n;
  std::vector<std::int64_t> window;
  std::string pbm_path;
  closure_cmd->add_option("--family", family_text, "Builtin name or inline JSON family")->required();
  closure_cmd->add_option("--seeds", seeds_text, "JSON list of [x,y] sites")->required();
  auto* n_opt = closure_cmd->add_option("--n", torus_n, "Torus side");
  auto* w_opt = closure_cmd->add_option("--window", window, "Window x_min y_min x_max y_max")->expected(4);
  n_opt->excludes(w_opt);
  closure_cmd->add_option("--pbm", pbm_path, "Also write the closure as a PBM image");
  closure_cmd->add_option("--out", out, "Output path (default stdout)");

  // span
  auto* span_cmd = app.add_subcommand("span", "Droplet span of a finite seed set with its merge trace");
  double p = 0.1, epsilon = 0.5;
  std::string dot_path;
  std::optional<std::uint64_t> shuffle_seed;
  span_cmd->add_option("--family", family_text, "Builtin name or inline JSON family")->capture_default_str();
  span_cmd->add_option("--seeds", seeds_text, "JSON list of [x,y] sites")->required();
  span_cmd->add_option("--p", p, "Droplet parameter p in (0,1)")->required();
  span_cmd->add_option("--epsilon", epsilon, "Droplet parameter epsilon > 0")->required();
  span_cmd->add_option("--shuffle-seed", shuffle_seed, "Fuse pairs in a seeded random order");
  span_cmd->add_option("--dot", dot_path, "Also write the merge trace as Graphviz DOT");
  span_cmd->add_option("--out", out, "Output path (default stdout)");

  // droplet
  auto* droplet_cmd = app.add_subcommand("droplet", "Minimal droplet of a site set, or droplet shape counts");
  std::optional<std::int64_t> count_width;
  droplet_cmd->add_option("--p", p, "Droplet parameter p in (0,1)")->required();
  droplet_cmd->add_option("--epsilon", epsilon, "Droplet parameter epsilon > 0")->required();
  auto* sites_opt = droplet_cmd->add_option("--sites", seeds_text, "JSON list of [x,y] sites");
  auto* count_opt = droplet_cmd->add_option("--count-width", count_width, "Count droplet shapes with right edge at this x");
  sites_opt->excludes(count_opt);
  droplet_cmd->add_option("--out", out, "Output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Percolation frequency on the torus from p-random sets");
  std::int64_t n = 64, trials = 100;
  std::string replay_path;
  simulate->add_option("--family", family_text, "Builtin name or inline JSON family")->capture_default_str();
  simulate->add_option("--n", n, "Torus side")->capture_default_str();
  simulate->add_option("--p", p, "Infection probability");
  simulate->add_option("--trials", trials, "Number of trials")->capture_default_str();
  simulate->add_option("--seed", seed, "Master seed")->capture_default_str();
  simulate->add_option("--replay", replay_path, "Re-run a recorded manifest and compare outcomes");
  simulate->add_option("--workers", workers, "Worker threads (default BOOTSTRAP_LAB_WORKERS or all cores)");
  simulate->add_option("--manifest-dir", manifest_dir, "Also write <subcommand>-<seed>.json here");
  simulate->add_option("--out", out, "Output path (default stdout)");

  // estimate-pc
  auto* estimate = app.add_subcommand("estimate-pc", "Bisection estimate of the critical probability");
  std::optional<double> tolerance;
  std::int64_t pc_trials = 200;
  estimate->add_option("--family", family_text, "Builtin name or inline JSON family")->capture_default_str();
  estimate->add_option("--n", n, "Torus side")->capture_default_str();
  estimate->add_option("--trials", pc_trials, "Trials per probe")->capture_default_str();
  estimate->add_option("--tolerance", tolerance, "Bracket width (default 1/(4 log n))");
  estimate->add_option("--seed", seed, "Master seed")->capture_default_str();
  estimate->add_option("--workers", workers, "Worker threads (default BOOTSTRAP_LAB_WORKERS or all cores)");
  estimate->add_option("--manifest-dir", manifest_dir, "Also write <subcommand>-<seed>.json here");
  estimate->add_option("--out", out, "Output path (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Critical probability estimates over a list of torus sizes");
  std::vector<std::string> families{"duarte", "modified_duarte"};
  std::vector<std::int64_t> n_list{64, 128, 256};
  std::string csv_out;
  sweep->add_option("--families", families, "Families to sweep")->capture_default_str();
  sweep->add_option("--n-list", n_list, "Nondecreasing torus sides")->capture_default_str();
  sweep->add_option("--trials", pc_trials, "Trials per probe")->capture_default_str();
  sweep->add_option("--seed", seed, "Master seed")->capture_default_str();
  sweep->add_option("--workers", workers, "Worker threads (default BOOTSTRAP_LAB_WORKERS or all cores)");
  sweep->add_option("--manifest-dir", manifest_dir, "Also write <subcommand>-<seed>.json here");
  sweep->add_option("--csv", csv_out, "CSV path (default sweep-<seed>.csv)");
  sweep->add_option("--out", out, "JSON output path (default stdout)");

  // growth
  auto* growth = app.add_subcommand("growth", "Staged growth events of the Duarte upper-bound construction");
  double g_eps = 0.25, g_p = 0.15;
  std::int64_t g_trials = 2000;
  growth->add_option("--epsilon", g_eps, "Epsilon; replaced by 1/ceil(1/epsilon)")->capture_default_str();
  growth->add_option("--p", g_p, "Infection probability")->capture_default_str();
  growth->add_option("--trials", g_trials, "Trials per event")->capture_default_str();
  growth->add_option("--seed", seed, "Master seed")->capture_default_str();
  growth->add_option("--workers", workers, "Worker threads (default BOOTSTRAP_LAB_WORKERS or all cores)");
  growth->add_option("--manifest-dir", manifest_dir, "Also write <subcommand>-<seed>.json here");
  growth->add_option("--csv", csv_out, "CSV path (default growth-<seed>.csv)");
  growth->add_option("--out", out, "JSON output path (default stdout)");

  // lines
  auto* lines = app.add_subcommand("lines", "Frequency of no empty run of ceil(1/p^3) sites in any torus line");
  lines->add_option("--n", n, "Torus side")->capture_default_str();
  lines->add_option("--p", p, "Infection probability")->required();
  lines->add_option("--trials", trials, "Number of trials")->capture_default_str();
  lines->add_option("--seed", seed, "Master seed")->capture_default_str();
  lines->add_option("--workers", workers, "Worker threads (default BOOTSTRAP_LAB_WORKERS or all cores)");
  lines->add_option("--manifest-dir", manifest_dir, "Also write <subcommand>-<seed>.json here");
  lines->add_option("--out", out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::optional<Failure> failure;
  try {
    if (classify->parsed()) {
      const UpdateFamily fam = bootlab::parse_family(family_text);
      const bootlab::DifficultyBudget budget{max_helpers, window_radius};
      json j = envelope("classify", {{"family", bootlab::family_to_json(fam)},
                                     {"max_helpers", max_helpers},
                                     {"window_radius", window_radius}});
      j["result"] = bootlab::classification_json(bootlab::classify(fam, budget));
      emit(out, j);
    } else if (closure_cmd->parsed()) {
      const UpdateFamily fam = bootlab::parse_family(family_text);
      const auto seeds = parse_sites(seeds_text);
      if (!torus_n && window.empty()) throw bootlab::InvalidArgument("closure needs --n or --window");
      const bootlab::Geometry geom =
          torus_n ? bootlab::Geometry::torus(*torus_n)
                  : bootlab::Geometry::window(bootlab::Box{window[0], window[1], window[2], window[3]});
      for (const auto& s : seeds)
        if (!geom.contains(s)) throw bootlab::InvalidArgument("seed outside the geometry");
      const bootlab::LatticeState c = bootlab::closure(bootlab::LatticeState(geom, seeds), fam);
      json config = {{"family", bootlab::family_to_json(fam)}, {"seeds", bootlab::sites_json(seeds)}};
      if (torus_n) config["n"] = *torus_n;
      else config["window"] = window;
      json j = envelope("closure", std::move(config));
      j["result"] = {{"geometry", torus_n ? "torus" : "window"},
                     {"count", c.count()},
                     {"full", c.full()},
                     {"sites", bootlab::sites_json(c.sites())}};
      if (!pbm_path.empty()) write_text(pbm_path, c.to_pbm());
      emit(out, j);
    } else if (span_cmd->parsed()) {
      const UpdateFamily fam = bootlab::parse_family(family_text);
      const auto seeds = parse_sites(seeds_text);
      bootlab::SpanOptions opts;
      opts.shuffle_seed = shuffle_seed;
      const bootlab::SpanResult r = bootlab::span(seeds, fam, bootlab::GrowthParams(epsilon, p), opts);
      json config = {{"family", bootlab::family_to_json(fam)},
                     {"seeds", bootlab::sites_json(seeds)},
                     {"p", p},
                     {"epsilon", epsilon}};
      config["shuffle_seed"] = shuffle_seed ? json(*shuffle_seed) : json();
      json j = envelope("span", std::move(config));
      j["result"] = bootlab::span_json(r);
      if (!dot_path.empty()) write_text(dot_path, bootlab::span_dot(r));
      emit(out, j);
    } else if (droplet_cmd->parsed()) {
      const bootlab::GrowthParams g(epsilon, p);
      json config = {{"p", p}, {"epsilon", epsilon}};
      json result;
      if (count_width) {
        const bootlab::ShapeCount sc = bootlab::enumerate_droplet_shapes(g, *count_width);
        config["count_width"] = *count_width;
        result = {{"width", *count_width},
                  {"count", sc.count},
                  {"grid", sc.grid},
                  {"tops_bichain", bootlab::is_bichain(bootlab::top_profile_sets(sc.tops))}};
      } else {
        if (seeds_text.empty()) throw bootlab::InvalidArgument("droplet needs --sites or --count-width");
        const auto sites = parse_sites(seeds_text);
        if (sites.empty()) throw bootlab::InvalidArgument("site list must be nonempty");
        const bootlab::Droplet d = bootlab::droplet_of(g, sites);
        config["sites"] = bootlab::sites_json(sites);
        result = {{"droplet", bootlab::droplet_json(d)}, {"lattice_sites", bootlab::sites_json(d.sites())}};
      }
      json j = envelope("droplet", std::move(config));
      j["result"] = std::move(result);
      emit(out, j);
    } else if (simulate->parsed()) {
      if (!replay_path.empty()) {
        std::ifstream f(replay_path);
        if (!f) throw bootlab::InvalidArgument("cannot read " + replay_path);
        json recorded;
        try {
          recorded = json::parse(f);
        } catch (const json::exception& e) {
          throw bootlab::InvalidArgument(std::string("malformed manifest: ") + e.what());
        }
        const bootlab::RunManifest m =
            bootlab::manifest_from_json(recorded.contains("manifest") ? recorded.at("manifest") : recorded);
        const bootlab::ReplayResult r = bootlab::replay(m, workers);
        json j = envelope("simulate", {{"replay", replay_path}, {"plan", bootlab::plan_to_json(m.plan)}});
        j["replay"] = {{"identical", r.identical}, {"first_mismatch", r.first_mismatch}};
        j["manifest"] = bootlab::manifest_to_json(r.rerun);
        emit(out, j);
        if (!r.identical) failure = Failure{1, "replay_mismatch", "replayed outcomes differ from the manifest"};
      } else {
        if (simulate->count("--p") == 0) throw bootlab::InvalidArgument("simulate needs --p or --replay");
        const bootlab::TrialPlan plan{bootlab::parse_family(family_text), n, p, trials, seed};
        const bootlab::RunManifest m = bootlab::sample_percolation(plan, workers);
        json j = envelope("simulate", {{"plan", bootlab::plan_to_json(plan)},
                                       {"workers", bootlab::resolve_workers(workers)}});
        j["manifest"] = bootlab::manifest_to_json(m);
        write_manifest(manifest_dir, "simulate", seed, j);
        emit(out, j);
      }
    } else if (estimate->parsed()) {
      const UpdateFamily fam = bootlab::parse_family(family_text);
      const double tol = tolerance.value_or(bootlab::default_pc_tolerance(n));
      const bootlab::PcEstimate e = bootlab::estimate_pc(fam, n, pc_trials, tol, seed, workers);
      json j = envelope("estimate-pc", {{"family", bootlab::family_to_json(fam)},
                                        {"n", n},
                                        {"trials", pc_trials},
                                        {"tolerance", tol},
                                        {"master_seed", seed},
                                        {"workers", bootlab::resolve_workers(workers)}});
      j["timestamp"] = bootlab::utc_timestamp();
      j["result"] = bootlab::pc_estimate_to_json(e);
      write_manifest(manifest_dir, "estimate-pc", seed, j);
      emit(out, j);
      if (e.degenerate) failure = Failure{1, "degenerate_bracket", "percolation fraction never crosses 1/2 on [0,1]"};
    } else if (sweep->parsed()) {
      std::vector<UpdateFamily> fams;
      json fam_json = json::array();
      for (const auto& f : families) {
        fams.push_back(bootlab::parse_family(f));
        fam_json.push_back(bootlab::family_to_json(fams.back()));
      }
      const auto rows = bootlab::scaling_sweep(fams, n_list, pc_trials, seed, workers);
      if (csv_out.empty()) csv_out = "sweep-" + std::to_string(seed) + ".csv";
      std::string csv = "family,n,p_hat,lo,hi,normalized\n";
      json jrows = json::array();
      for (const auto& r : rows) {
        csv += r.family + "," + std::to_string(r.n) + "," + csv_number(r.p_hat) + "," + csv_number(r.lo) + "," +
               csv_number(r.hi) + "," + csv_number(r.normalized) + "\n";
        jrows.push_back({{"family", r.family},
                         {"n", r.n},
                         {"p_hat", r.p_hat},
                         {"lo", r.lo},
                         {"hi", r.hi},
                         {"normalized", r.normalized},
                         {"estimate", bootlab::pc_estimate_to_json(r.estimate)}});
      }
      write_text(csv_out, csv);
      json j = envelope("sweep", {{"families", fam_json},
                                  {"n_list", n_list},
                                  {"trials", pc_trials},
                                  {"master_seed", seed},
                                  {"workers", bootlab::resolve_workers(workers)},
                                  {"csv", csv_out}});
      j["timestamp"] = bootlab::utc_timestamp();
      j["result"] = {{"rows", jrows}};
      write_manifest(manifest_dir, "sweep", seed, j);
      emit(out, j);
    } else if (growth->parsed()) {
      const bootlab::GrowthResult r = bootlab::growth_construction(g_eps, g_p, g_trials, seed, workers);
      if (csv_out.empty()) csv_out = "growth-" + std::to_string(seed) + ".csv";
      std::string csv = "stage,event,emp,lo,hi,bound\n";
      json reps = json::array();
      bool all_pass = true;
      for (const auto& rep : r.reports) {
        csv += std::to_string(rep.event.stage) + "," + rep.event.name + "," + csv_number(rep.emp) + "," +
               csv_number(rep.interval.lo) + "," + csv_number(rep.interval.hi) + "," + csv_number(rep.event.bound) +
               "\n";
        reps.push_back(bootlab::growth_report_json(rep));
        all_pass = all_pass && rep.pass;
      }
      write_text(csv_out, csv);
      json j = envelope("growth", {{"epsilon", g_eps},
                                   {"epsilon_used", r.plan.epsilon},
                                   {"k", r.plan.k},
                                   {"p", g_p},
                                   {"trials", g_trials},
                                   {"master_seed", seed},
                                   {"workers", bootlab::resolve_workers(workers)},
                                   {"csv", csv_out}});
      j["timestamp"] = bootlab::utc_timestamp();
      j["result"] = {{"h", r.plan.h}, {"w", r.plan.w}, {"w_hat", r.plan.w_hat}, {"all_pass", all_pass}, {"stages", reps}};
      write_manifest(manifest_dir, "growth", seed, j);
      emit(out, j);
    } else if (lines->parsed()) {
      const bootlab::LineCheck lc = bootlab::no_empty_line_check(n, p, seed, trials, workers);
      json j = envelope("lines", {{"n", n},
                                  {"p", p},
                                  {"trials", trials},
                                  {"master_seed", seed},
                                  {"workers", bootlab::resolve_workers(workers)}});
      j["timestamp"] = bootlab::utc_timestamp();
      j["result"] = {{"run_length", lc.run_length},
                     {"successes", lc.successes},
                     {"fraction", lc.fraction},
                     {"lo", lc.interval.lo},
                     {"hi", lc.interval.hi},
                     {"bound", lc.bound}};
      write_manifest(manifest_dir, "lines", seed, j);
      emit(out, j);
    }
  } catch (const bootlab::InvalidArgument& e) {
    failure = Failure{2, "invalid_argument", e.what()};
  } catch (const bootlab::BudgetExceeded& e) {
    failure = Failure{3, "budget_exceeded", e.what()};
  } catch (const bootlab::Error& e) {
    failure = Failure{1, "error", e.what()};
  } catch (const std::exception& e) {
    failure = Failure{1, "internal", e.what()};
  }

  if (failure) {
    const json diag = {{"schema_version", bootlab::kSchemaVersion},
                       {"error", failure->kind},
                       {"message", failure->message},
                       {"exit_code", failure->code}};
    std::cerr << diag.dump() << "\n";
    return failure->code;
  }
  return 0;
}
