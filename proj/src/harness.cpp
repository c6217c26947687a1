#include "qsh/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "qsh/edge_current.hpp"
#include "qsh/error.hpp"
#include "qsh/homotopy.hpp"
#include "qsh/parallel.hpp"
#include "qsh/realspace.hpp"
#include "qsh/transfer.hpp"

namespace qsh::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Parameter tables

enum class Kind { integer, number, boolean, text, number_list, seed_list, window };

struct Param {
  const char* name;
  Kind kind;
  json fallback;  // null => required
  double min = -1e300;
  double max = 1e300;
  std::vector<std::string> choices = {};
};

const std::vector<Param>& params_for(Task t) {
  static const std::vector<Param> transfer = {
      {"N_k", Kind::integer, 512, 2, 1e7},
      {"max_refine", Kind::integer, 2, 0, 12},
      {"gap_grid", Kind::integer, 64, 4, 4096},
      {"certify_gap", Kind::boolean, true},
  };
  static const std::vector<Param> realspace = {
      {"N1", Kind::integer, 24, 4, 400},
      {"N2", Kind::integer, 24, 4, 400},
      {"seeds", Kind::seed_list, json::array()},
      {"lambda", Kind::number, 1.0, 0.0, 1.0},
      {"min_island_gap", Kind::number, kDefaultIslandGap, 0.0, 1e9},
      {"window_fraction", Kind::number, kWindowFraction, 1e-6, 1.0},
  };
  static const std::vector<Param> edge = {
      {"N2", Kind::integer, 48, kMinRibbonWidth, 1e6},
      {"N_k", Kind::integer, 512, 1, 1e7},
      {"lambda", Kind::number, 1.0, 0.0, 1.0},
      {"g_center_fraction", Kind::number, 0.5, 0.0, 1.0},
      {"g_width_fraction", Kind::number, 0.5, 1e-9, 1.0},
      {"edge", Kind::text, "lower", 0, 0, {"lower", "upper"}},
      {"cutoff_row", Kind::integer, -1, -1, 1e6},
      {"gap_grid", Kind::integer, kGapGrid, 4, 4096},
      {"N1", Kind::integer, 24, 1, 1e5},
      {"twists", Kind::integer, 8, 1, 1e5},
      {"seeds", Kind::seed_list, json::array()},
  };
  static const std::vector<Param> scan = {
      {"coupling", Kind::text, "rashba", 0, 0, {"rashba", "zeeman"}},
      {"values", Kind::number_list, nullptr},
      {"N2", Kind::integer, 48, kMinRibbonWidth, 1e6},
      {"N_k", Kind::integer, 512, 1, 1e7},
      {"g_center_fraction", Kind::number, 0.5, 0.0, 1.0},
      {"g_width_fraction", Kind::number, 0.5, 1e-9, 1.0},
      {"cutoff_row", Kind::integer, -1, -1, 1e6},
      {"gap_grid", Kind::integer, kGapGrid, 4, 4096},
  };
  static const std::vector<Param> gap = {
      {"N", Kind::integer, 64, 1, 4096},
      {"window", Kind::window, json()},
      {"lambda", Kind::number, 1.0, 0.0, 1.0},
      {"island_torus", Kind::integer, 12, 0, 400},
      {"min_island_gap", Kind::number, kDefaultIslandGap, 0.0, 1e9},
  };
  switch (t) {
    case Task::spin_chern_transfer: return transfer;
    case Task::spin_chern_realspace: return realspace;
    case Task::edge_current: return edge;
    case Task::perturbation_scan: return scan;
    case Task::gap_report: return gap;
  }
  throw InputError("unknown task");
}

json check_param(const Param& p, const json& v) {
  const std::string where = "params." + std::string(p.name);
  auto range = [&](double x) {
    if (!(x >= p.min && x <= p.max)) {
      throw InputError(where + " = " + format_number(x) + " outside [" + format_number(p.min) + ", " +
                       format_number(p.max) + "]");
    }
  };
  switch (p.kind) {
    case Kind::integer:
      if (!v.is_number_integer()) throw InputError(where + " must be an integer");
      range(v.get<double>());
      return v;
    case Kind::number:
      if (!v.is_number()) throw InputError(where + " must be a number");
      range(v.get<double>());
      return v;
    case Kind::boolean:
      if (!v.is_boolean()) throw InputError(where + " must be true or false");
      return v;
    case Kind::text:
      if (!v.is_string()) throw InputError(where + " must be a string");
      if (!p.choices.empty() &&
          std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) == p.choices.end()) {
        throw InputError(where + " has unknown value '" + v.get<std::string>() + "'");
      }
      return v;
    case Kind::number_list:
      if (!v.is_array()) throw InputError(where + " must be an array of numbers");
      for (const auto& x : v) {
        if (!x.is_number()) throw InputError(where + " must be an array of numbers");
      }
      return v;
    case Kind::seed_list:
      if (!v.is_array()) throw InputError(where + " must be an array of non-negative integers");
      for (const auto& x : v) {
        if (!x.is_number_unsigned()) throw InputError(where + " must be an array of non-negative integers");
      }
      return v;
    case Kind::window:
      if (v.is_null()) return v;
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() ||
          !(v[0].get<double>() < v[1].get<double>())) {
        throw InputError(where + " must be [lo, hi] with lo < hi");
      }
      return v;
  }
  return v;
}

json fill_params(Task t, const json& given) {
  if (!given.is_object()) throw InputError("params must be an object");
  const auto& table = params_for(t);
  for (const auto& [key, _] : given.items()) {
    if (std::none_of(table.begin(), table.end(), [&](const Param& p) { return key == p.name; })) {
      throw InputError("unknown parameter params." + key + " for task " + to_string(t));
    }
  }
  json out = json::object();
  for (const auto& p : table) {
    if (given.contains(p.name)) {
      out[p.name] = check_param(p, given[p.name]);
    } else if (p.fallback.is_null() && p.kind != Kind::window) {
      throw InputError("missing parameter params." + std::string(p.name) + " for task " + to_string(t));
    } else {
      out[p.name] = p.fallback;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Small helpers

std::string level_name(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f", level);
  return buf;
}

std::vector<std::uint64_t> seeds_of(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  if (cfg.params.contains("seeds")) {
    for (const auto& s : cfg.params["seeds"]) seeds.push_back(s.get<std::uint64_t>());
  }
  if (seeds.empty()) seeds.push_back(cfg.model.seed);
  return seeds;
}

Interval gap_window(const ExperimentConfig& cfg) {
  if (cfg.params.contains("window") && !cfg.params["window"].is_null()) {
    return {cfg.params["window"][0].get<double>(), cfg.params["window"][1].get<double>()};
  }
  return {cfg.model.E_g - 1e-6, cfg.model.E_g + 1e-6};
}

void require_E_g_inside(const GapReport& rep, double E_g) {
  if (!rep.gap_interval.contains(E_g)) {
    throw GuardError(guard::kGapViolated, "E_g = " + format_number(E_g) + " outside the certified gap (" +
                                              format_number(rep.gap_interval.lo) + ", " +
                                              format_number(rep.gap_interval.hi) + ")");
  }
}

std::string write_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_line(header);
  for (const auto& r : rows) out += csv_line(r);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

// ---------------------------------------------------------------------------
// Tasks

void run_transfer(const ExperimentConfig& cfg, TaskOutput& out) {
  const auto& p = cfg.params;
  if (p["certify_gap"].get<bool>()) {
    const GapReport rep = bloch_gap_report(cfg.model, p["gap_grid"].get<int>(), gap_window(cfg));
    require_E_g_inside(rep, cfg.model.E_g);
  }
  const int N_k = p["N_k"].get<int>();
  const auto levels = spin_chern_transfer(cfg.model, N_k, p["max_refine"].get<int>());
  json per_level = json::array();
  int total = 0;
  for (const auto& lc : levels) {
    out.rows.push_back({format_number(lc.level), std::to_string(lc.chern), format_number(lc.detail.raw),
                        format_number(lc.detail.phase_defect), std::to_string(lc.detail.refinements),
                        std::to_string(N_k), std::to_string(lc.detail.samples.size())});
    std::vector<std::vector<std::string>> diag;
    for (const auto& s : lc.detail.samples) {
      diag.push_back({format_number(s.k), format_number(s.margin), format_number(s.residual), format_number(s.phase)});
    }
    out.aux.push_back({"transfer_k_level_" + level_name(lc.level) + ".csv",
                       write_csv({"k", "margin", "residual", "phase"}, diag)});
    per_level.push_back({{"level", lc.level}, {"chern", lc.chern}, {"phase_defect", lc.detail.phase_defect}});
    total += lc.chern;
  }
  out.summary = {{"levels", per_level}, {"sum", total}};
}

void run_realspace(const ExperimentConfig& cfg, int threads, TaskOutput& out) {
  const auto& p = cfg.params;
  const auto seeds = seeds_of(cfg);
  out.seeds = seeds;
  const int n = static_cast<int>(seeds.size());
  std::vector<std::optional<RealspaceResult>> results(n);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, threads, [&](int i) {
    try {
      results[i] = spin_chern_realspace(cfg.model, p["N1"].get<int>(), p["N2"].get<int>(), seeds[i],
                                        p["lambda"].get<double>(), p["min_island_gap"].get<double>(),
                                        p["window_fraction"].get<double>());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  std::map<double, std::set<int>> rounded;
  for (int i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    const auto& r = *results[i];
    for (const auto& l : r.levels) {
      out.rows.push_back({std::to_string(seeds[i]), format_number(l.level), format_number(l.estimate.raw),
                          std::to_string(l.estimate.rounded), format_number(l.estimate.spread),
                          std::to_string(l.estimate.window_cells), format_number(r.total.raw),
                          format_number(r.min_island_gap), format_number(r.commutator)});
      rounded[l.level].insert(l.estimate.rounded);
    }
  }
  json consensus = json::array();
  bool identical = true;
  for (const auto& [level, values] : rounded) {
    identical = identical && values.size() == 1;
    consensus.push_back({{"level", level}, {"rounded", std::vector<int>(values.begin(), values.end())}});
  }
  out.summary = {{"levels", consensus}, {"identical_across_seeds", identical}};
}

std::vector<std::string> edge_row(const EdgeCurrentResult& r, const std::string& coupling, double value,
                                  double deviation, double measured_C) {
  return {format_number(r.lambda),       coupling,
          format_number(value),          format_number(r.comm_norm),
          format_number(r.j_lower),      format_number(r.j_upper),
          std::to_string(r.N2),          std::to_string(r.N_k),
          format_number(r.g.E_c),        format_number(r.g.w),
          format_number(r.g.norm6),      std::to_string(r.cutoff_row),
          format_number(r.residual_estimate), format_number(deviation),
          format_number(measured_C)};
}

EdgeOptions edge_options(const ExperimentConfig& cfg, int threads) {
  EdgeOptions o;
  o.cutoff_row = cfg.params["cutoff_row"].get<int>();
  o.gap_grid = cfg.params["gap_grid"].get<int>();
  o.threads = threads;
  return o;
}

void run_edge(const ExperimentConfig& cfg, int threads, TaskOutput& out) {
  const auto& p = cfg.params;
  const double lambda = p["lambda"].get<double>();
  const Edge edge = p["edge"].get<std::string>() == "lower" ? Edge::lower : Edge::upper;
  const EdgeOptions opts = edge_options(cfg, threads);
  const int N2 = p["N2"].get<int>();
  if (cfg.model.lambda_dis == 0.0) {
    const GapReport gap = bloch_gap_report(cfg.model, opts.gap_grid, gap_window(cfg), lambda);
    require_E_g_inside(gap, cfg.model.E_g);
    const SmoothDensity g =
        bump_g(gap.gap_interval, p["g_center_fraction"].get<double>(), p["g_width_fraction"].get<double>());
    const EdgeCurrentResult r = edge_current(cfg.model, lambda, N2, p["N_k"].get<int>(), g, edge, opts);
    out.rows.push_back(edge_row(r, "none", 0.0, 0.0, 0.0));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < r.row_density.size(); ++i) {
      rows.push_back({std::to_string(i), format_number(r.row_density[i])});
    }
    out.aux.push_back({"edge_rows.csv", write_csv({"n2", "current"}, rows)});
    out.summary = to_json(r);
    out.summary.erase("row_density");
    return;
  }
  // Disordered: gap from the torus of the first seed, then ring averages.
  const auto seeds = seeds_of(cfg);
  out.seeds = seeds;
  const int N1 = p["N1"].get<int>();
  ModelSpec first = cfg.model;
  first.seed = seeds.front();
  const HamiltonianMatrix torus = apply_homotopy(build_hamiltonian(first, Torus{N1, N2}), cfg.model.s, lambda);
  const GapReport gap = find_gap(std::vector<RVec>{eigvalsh(torus.h)}, gap_window(cfg));
  require_E_g_inside(gap, cfg.model.E_g);
  const SmoothDensity g =
      bump_g(gap.gap_interval, p["g_center_fraction"].get<double>(), p["g_width_fraction"].get<double>());
  const int twists = p["twists"].get<int>();
  const DisorderedEdgeCurrent d = edge_current_disordered(cfg.model, lambda, N1, N2, twists, g, seeds, edge, opts);
  EdgeCurrentResult r;
  r.lambda = lambda;
  r.N2 = N2;
  r.N_k = N1 * twists;
  r.g = g;
  r.cutoff_row = opts.cutoff_row < 0 ? N2 / 2 : opts.cutoff_row;
  r.comm_norm = commutator_norm(torus.h, torus.sz_full(cfg.model.s));
  (edge == Edge::lower ? r.j_lower : r.j_upper) = d.j_e;
  (edge == Edge::lower ? r.j_upper : r.j_lower) = std::nan("");
  r.residual_estimate = d.spread;
  out.rows.push_back(edge_row(r, "none", 0.0, 0.0, 0.0));
  out.summary = {{"j_e", d.j_e}, {"per_seed", d.per_seed}, {"seed_spread", d.spread}, {"g", to_json(g)}};
}

void run_scan(const ExperimentConfig& cfg, int threads, TaskOutput& out) {
  const auto& p = cfg.params;
  const Coupling coupling = coupling_from_string(p["coupling"].get<std::string>());
  ModelSpec base = cfg.model;
  (coupling == Coupling::rashba ? base.lambda_Ra : base.lambda_Ze) = 0.0;
  const EdgeOptions opts = edge_options(cfg, threads);
  const GapReport gap = bloch_gap_report(base, opts.gap_grid, gap_window(cfg));
  require_E_g_inside(gap, cfg.model.E_g);
  const SmoothDensity g =
      bump_g(gap.gap_interval, p["g_center_fraction"].get<double>(), p["g_width_fraction"].get<double>());
  const auto values = p["values"].get<std::vector<double>>();
  const ScanResult scan = perturbation_scan(cfg.model, coupling, values, g, p["N2"].get<int>(), p["N_k"].get<int>(),
                                            opts);
  for (const auto& row : scan.rows) {
    out.rows.push_back(edge_row(row.current, to_string(coupling), row.value, row.deviation, row.measured_C));
  }
  out.summary = to_json(scan);
  out.summary["g"] = to_json(g);
  out.summary.erase("rows");
}

void run_gap(const ExperimentConfig& cfg, TaskOutput& out) {
  const auto& p = cfg.params;
  const ModelSpec& m = cfg.model;
  const double lambda = p["lambda"].get<double>();
  const int N = p["N"].get<int>();
  GapReport rep;
  std::string method;
  if (m.lambda_dis == 0.0 && m.flux_B.zero()) {
    rep = bloch_gap_report(m, N, gap_window(cfg), lambda);
    method = "bloch";
  } else {
    const HamiltonianMatrix h = apply_homotopy(build_hamiltonian(m, Torus{N, N}), m.s, lambda);
    rep = find_gap(std::vector<RVec>{eigvalsh(h.h)}, gap_window(cfg));
    rep.C_s = commutator_norm(h.h, h.sz_full(m.s));
    method = "torus";
  }
  require_E_g_inside(rep, m.E_g);
  rep.E_g = m.E_g;
  const int isl = p["island_torus"].get<int>();
  if (isl > 0) {
    const HamiltonianMatrix h = apply_homotopy(build_hamiltonian(m, Torus{isl, isl}), m.s, lambda);
    const ProjectionSet ps =
        psp_islands(fermi_projection(h, m.E_g), h.sz_diagonal(m.s), m.s, p["min_island_gap"].get<double>());
    rep.min_island_gap = ps.min_island_gap;
    out.summary["islands"] = island_summary(ps);
  }
  out.rows.push_back({format_number(rep.E_g), format_number(rep.gap_interval.lo), format_number(rep.gap_interval.hi),
                      format_number(rep.gap_interval.width()), format_number(rep.min_island_gap),
                      format_number(rep.C_s), method});
  out.summary["gap"] = to_json(rep);
  out.summary["method"] = method;
}

// ---------------------------------------------------------------------------
// Output directory handling

fs::path resolve_out(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.out_dir) return *opts.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  throw InputError("no output directory: set output_dir in the config or pass --out");
}

void check_budget(double cost, double budget, bool force) {
  if (cost > budget && !force) {
    throw InputError("estimated cost " + format_number(cost) + " exceeds budget " + format_number(budget) +
                     "; pass --force-budget to run anyway");
  }
}

json manifest_base(const ExperimentConfig& cfg) {
  return {{"tool", kToolName},
          {"tool_version", kToolVersion},
          {"format_version", cfg.format_version},
          {"task", to_string(cfg.task)},
          {"config_hash", config_hash(cfg.raw)},
          {"config", cfg.raw}};
}

int report_error(std::ostream& log, const std::exception& e, const char* what) {
  log << what << ": " << e.what() << "\n";
  return kExitValidation;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Task t) {
  switch (t) {
    case Task::spin_chern_transfer: return "spin-chern-transfer";
    case Task::spin_chern_realspace: return "spin-chern-realspace";
    case Task::edge_current: return "edge-current";
    case Task::perturbation_scan: return "perturbation-scan";
    case Task::gap_report: return "gap-report";
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  for (Task t : {Task::spin_chern_transfer, Task::spin_chern_realspace, Task::edge_current, Task::perturbation_scan,
                 Task::gap_report}) {
    if (to_string(t) == name) return t;
  }
  throw InputError("unknown task '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  static const std::set<std::string> known = {"format_version", "task",  "model", "params",
                                              "output_dir",     "sweep", "budget"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InputError("unknown top-level field '" + key + "'");
  }
  for (const char* key : {"format_version", "task", "model"}) {
    if (!j.contains(key)) throw InputError(std::string("missing top-level field '") + key + "'");
  }
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion) {
    throw InputError("format_version must be " + std::to_string(kFormatVersion));
  }
  if (!j["task"].is_string()) throw InputError("task must be a string");
  cfg.task = task_from_string(j["task"].get<std::string>());
  cfg.model = model_spec_from_json(j["model"]);
  cfg.params = fill_params(cfg.task, j.value("params", json::object()));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw InputError("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("budget")) {
    if (!j["budget"].is_number() || !(j["budget"].get<double>() > 0)) throw InputError("budget must be positive");
    cfg.budget = j["budget"].get<double>();
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (!s.is_object()) throw InputError("sweep must be an object");
    for (const auto& [key, _] : s.items()) {
      if (key != "grid" && key != "seeds") throw InputError("unknown field sweep." + key);
    }
    SweepSpec spec;
    if (s.contains("grid")) {
      if (!s["grid"].is_object()) throw InputError("sweep.grid must be an object of arrays");
      for (const auto& [key, values] : s["grid"].items()) {
        if (key.rfind("model.", 0) != 0 && key.rfind("params.", 0) != 0) {
          throw InputError("sweep.grid key '" + key + "' must start with model. or params.");
        }
        if (!values.is_array()) throw InputError("sweep.grid." + key + " must be an array");
        spec.grid.push_back({key, std::vector<json>(values.begin(), values.end())});
      }
    }
    if (s.contains("seeds")) {
      if (!s["seeds"].is_array()) throw InputError("sweep.seeds must be an array");
      for (const auto& x : s["seeds"]) {
        if (!x.is_number_unsigned()) throw InputError("sweep.seeds must be non-negative integers");
        spec.seeds.push_back(x.get<std::uint64_t>());
      }
    }
    cfg.sweep = spec;
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const json& j) {
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double estimate_cost(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  const double L = cfg.model.L();
  auto cube = [](double x) { return x * x * x; };
  switch (cfg.task) {
    case Task::spin_chern_transfer:
      return cfg.model.r() * p["N_k"].get<double>() * cube(4.0 * cfg.model.R) +
             cube(L) * std::pow(p["gap_grid"].get<double>(), 2);
    case Task::spin_chern_realspace:
      return static_cast<double>(seeds_of(cfg).size()) * cube(p["N1"].get<double>() * p["N2"].get<double>() * L);
    case Task::edge_current: {
      const double N2 = p["N2"].get<double>();
      if (cfg.model.lambda_dis != 0.0) {
        return static_cast<double>(seeds_of(cfg).size()) * (p["twists"].get<double>() + 1) *
               cube(p["N1"].get<double>() * N2 * L);
      }
      return p["N_k"].get<double>() * cube(N2 * L) + cube(L) * std::pow(p["gap_grid"].get<double>(), 2);
    }
    case Task::perturbation_scan:
      return (static_cast<double>(p["values"].size()) + 1) *
             (p["N_k"].get<double>() * cube(p["N2"].get<double>() * L) +
              cube(L) * std::pow(p["gap_grid"].get<double>(), 2));
    case Task::gap_report: {
      const double N = p["N"].get<double>();
      const double isl = cube(std::pow(p["island_torus"].get<double>(), 2) * L);
      if (cfg.model.lambda_dis == 0.0 && cfg.model.flux_B.zero()) return N * N * cube(L) + isl;
      return cube(N * N * L) + isl;
    }
  }
  return 0.0;
}

std::vector<std::string> task_columns(Task t) {
  switch (t) {
    case Task::spin_chern_transfer:
      return {"level", "chern", "raw_winding", "phase_defect", "refinements", "N_k", "samples"};
    case Task::spin_chern_realspace:
      return {"seed",  "level",    "raw",          "rounded",        "spread",
              "window_cells", "total_raw", "min_island_gap", "comm_norm"};
    case Task::edge_current:
    case Task::perturbation_scan:
      return {"lambda",   "coupling", "value",   "comm_norm",  "j_e_lower",  "j_e_upper",
              "N2",       "Nk",       "g_center", "g_width",   "g_norm6",    "cutoff_row",
              "residual_estimate", "deviation", "measured_C"};
    case Task::gap_report:
      return {"E_g", "gap_lo", "gap_hi", "gap_width", "min_island_gap", "C_s", "method"};
  }
  return {};
}

void execute(const ExperimentConfig& cfg, int threads, TaskOutput& out) {
  if (out.seeds.empty()) out.seeds = {cfg.model.seed};
  switch (cfg.task) {
    case Task::spin_chern_transfer: run_transfer(cfg, out); return;
    case Task::spin_chern_realspace: run_realspace(cfg, threads, out); return;
    case Task::edge_current: run_edge(cfg, threads, out); return;
    case Task::perturbation_scan: run_scan(cfg, threads, out); return;
    case Task::gap_report: run_gap(cfg, out); return;
  }
}

int run(const fs::path& config_path, const RunOptions& opts, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const InputError& e) {
    return report_error(log, e, "validation error");
  }
  return run(cfg, opts, log);
}

int run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
  fs::path dir;
  try {
    dir = resolve_out(cfg, opts);
    check_budget(estimate_cost(cfg), cfg.budget, opts.force_budget);
  } catch (const InputError& e) {
    return report_error(log, e, "validation error");
  }
  fs::create_directories(dir);

  const auto start = std::chrono::steady_clock::now();
  TaskOutput out;
  json manifest = manifest_base(cfg);
  int code = kExitOk;
  try {
    execute(cfg, std::max(1, opts.threads), out);
    manifest["status"] = "OK";
  } catch (const GuardError& e) {
    code = kExitGuard;
    manifest["status"] = "FAILED";
    manifest["guard"] = e.guard();
    manifest["error"] = e.what();
    log << "guard: " << e.guard() << "\n" << e.what() << "\n";
  } catch (const InputError& e) {
    code = kExitValidation;
    manifest["status"] = "FAILED";
    manifest["error"] = e.what();
    log << "validation error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = kExitFailure;
    manifest["status"] = "FAILED";
    manifest["error"] = e.what();
    log << "error: " << e.what() << "\n";
  }

  json files = json::array();
  write_file(dir / "results.csv", write_csv(task_columns(cfg.task), out.rows));
  files.push_back("results.csv");
  if (code == kExitOk) {
    write_file(dir / "result.json", out.summary.dump(2) + "\n");
    files.push_back("result.json");
  }
  for (const auto& aux : out.aux) {
    write_file(dir / aux.name, aux.content);
    files.push_back(aux.name);
  }
  manifest["seeds"] = out.seeds;
  manifest["files"] = files;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  if (code == kExitOk) log << "wrote " << (dir / "results.csv").string() << "\n";
  return code;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

json set_path(json raw, const std::string& key, const json& value) {
  const auto dot = key.find('.');
  const std::string section = key.substr(0, dot);
  const std::string field = key.substr(dot + 1);
  if (!raw.contains(section)) raw[section] = json::object();
  raw[section][field] = value;
  return raw;
}

struct PointResult {
  std::string status;
  std::string guard;
  std::vector<std::vector<std::string>> rows;
};

}  // namespace

int sweep(const fs::path& config_path, const RunOptions& opts, std::ostream& log) {
  ExperimentConfig cfg;
  fs::path dir;
  std::vector<json> points;  // patched raw configs, deterministic order
  std::vector<std::vector<std::string>> labels;
  std::vector<std::string> keys;
  try {
    cfg = load_config(config_path);
    if (!cfg.sweep) throw InputError("sweep needs a 'sweep' section in the config");
    dir = resolve_out(cfg, opts);
    for (const auto& [key, _] : cfg.sweep->grid) keys.push_back(key);
    std::vector<std::uint64_t> seeds = cfg.sweep->seeds;
    if (seeds.empty()) seeds.push_back(cfg.model.seed);

    std::size_t count = cfg.sweep->grid.empty() ? 0 : 1;
    for (const auto& [_, values] : cfg.sweep->grid) count *= values.size();
    json base = cfg.raw;
    base.erase("sweep");
    double cost = 0.0;
    for (std::size_t idx = 0; idx < count; ++idx) {
      // Mixed radix with the first key varying slowest.
      std::vector<std::size_t> digit(keys.size());
      std::size_t rest = idx;
      for (std::size_t k = keys.size(); k-- > 0;) {
        digit[k] = rest % cfg.sweep->grid[k].second.size();
        rest /= cfg.sweep->grid[k].second.size();
      }
      json patched = base;
      std::vector<std::string> label;
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const json& v = cfg.sweep->grid[k].second[digit[k]];
        patched = set_path(patched, keys[k], v);
        label.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
      for (auto seed : seeds) {
        json with_seed = set_path(patched, "model.seed", seed);
        if (cfg.task == Task::spin_chern_realspace || cfg.task == Task::edge_current) {
          with_seed = set_path(with_seed, "params.seeds", json::array({seed}));
        }
        const ExperimentConfig point = parse_config(with_seed);  // validates every point up front
        cost += estimate_cost(point);
        points.push_back(with_seed);
        auto l = label;
        l.insert(l.begin(), std::to_string(seed));
        labels.push_back(l);
      }
    }
    check_budget(cost, cfg.budget, opts.force_budget);
  } catch (const InputError& e) {
    return report_error(log, e, "validation error");
  }
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();

  // Resume from the checkpoint when it belongs to the same config.
  const fs::path ckpt = dir / "sweep.checkpoint.jsonl";
  const std::string hash = config_hash(cfg.raw);
  std::map<std::size_t, PointResult> done;
  if (fs::exists(ckpt)) {
    std::ifstream is(ckpt);
    std::string line;
    bool same = false;
    if (std::getline(is, line)) {
      try {
        same = json::parse(line).value("config_hash", "") == hash;
      } catch (...) {
      }
    }
    while (same && std::getline(is, line)) {
      try {
        const json e = json::parse(line);
        const auto index = e["index"].get<std::size_t>();
        if (index >= points.size()) continue;
        done[index] = PointResult{e["status"], e["guard"], e["rows"].get<std::vector<std::vector<std::string>>>()};
      } catch (...) {
        break;  // truncated trailing line from an interrupted run
      }
    }
  }
  {
    // Rewrite with the intact entries only, so appends never follow a torn line.
    std::ofstream os(ckpt, std::ios::trunc);
    os << json{{"config_hash", hash}}.dump() << "\n";
    for (const auto& [i, pr] : done) {
      os << json{{"index", i}, {"status", pr.status}, {"guard", pr.guard}, {"rows", pr.rows}}.dump() << "\n";
    }
  }
  if (!done.empty()) log << "resuming: " << done.size() << " of " << points.size() << " points done\n";

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!done.count(i)) todo.push_back(i);
  }
  std::vector<PointResult> fresh(todo.size());
  std::mutex mu;
  const int workers = std::max(1, opts.threads);
  parallel_for(static_cast<int>(todo.size()), workers, [&](int t) {
    const std::size_t i = todo[t];
    PointResult pr;
    TaskOutput out;
    try {
      execute(parse_config(points[i]), 1, out);
      pr.status = "ok";
    } catch (const GuardError& e) {
      pr.status = "failed";
      pr.guard = e.guard();
    } catch (const std::exception& e) {
      pr.status = "error";
      pr.guard = e.what();
    }
    pr.rows = out.rows;
    std::lock_guard<std::mutex> lock(mu);
    std::ofstream os(ckpt, std::ios::app);
    os << json{{"index", i}, {"status", pr.status}, {"guard", pr.guard}, {"rows", pr.rows}}.dump() << "\n";
    fresh[t] = std::move(pr);
  });
  for (std::size_t t = 0; t < todo.size(); ++t) done[todo[t]] = std::move(fresh[t]);

  std::vector<std::string> header = {"point", "seed"};
  header.insert(header.end(), keys.begin(), keys.end());
  header.push_back("status");
  header.push_back("guard");
  const auto cols = task_columns(cfg.task);
  header.insert(header.end(), cols.begin(), cols.end());
  std::vector<std::vector<std::string>> rows;
  int failed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointResult& pr = done.at(i);
    std::vector<std::string> prefix = {std::to_string(i)};
    prefix.insert(prefix.end(), labels[i].begin(), labels[i].end());
    prefix.push_back(pr.status);
    prefix.push_back(pr.guard);
    if (pr.status != "ok") ++failed;
    if (pr.rows.empty()) {
      auto row = prefix;
      row.resize(header.size());
      rows.push_back(row);
    }
    for (const auto& r : pr.rows) {
      auto row = prefix;
      row.insert(row.end(), r.begin(), r.end());
      row.resize(header.size());
      rows.push_back(row);
    }
  }
  write_file(dir / "sweep.csv", write_csv(header, rows));
  json manifest = manifest_base(cfg);
  manifest["status"] = failed == 0 ? "OK" : "PARTIAL";
  manifest["points"] = points.size();
  manifest["failed_points"] = failed;
  manifest["files"] = json::array({"sweep.csv", "sweep.checkpoint.jsonl"});
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::set<std::uint64_t> seeds;
  for (const auto& p : points) seeds.insert(p["model"]["seed"].get<std::uint64_t>());
  manifest["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows, " << failed
      << " failed points)\n";
  return kExitOk;
}

int validate(const fs::path& config_path, std::ostream& log) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    log << "ok: task " << to_string(cfg.task) << ", estimated cost " << format_number(estimate_cost(cfg)) << "\n";
    return kExitOk;
  } catch (const InputError& e) {
    return report_error(log, e, "validation error");
  }
}

int report(const fs::path& dir, std::ostream& log) {
  std::vector<fs::path> sources;
  for (const char* name : {"results.csv", "sweep.csv"}) {
    if (fs::exists(dir / name)) sources.push_back(dir / name);
  }
  if (sources.empty()) {
    log << "no results.csv or sweep.csv in " << dir.string() << "\n";
    return kExitValidation;
  }
  std::ostringstream summary;
  for (const auto& src : sources) {
    const auto table = read_csv(src);
    if (table.empty()) continue;
    const auto& header = table.front();
    std::ostringstream dat;
    dat << "#";
    for (const auto& h : header) dat << ' ' << h;
    dat << "\n";
    std::vector<std::vector<double>> columns(header.size());
    for (std::size_t r = 1; r < table.size(); ++r) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string cell = c < table[r].size() ? table[r][c] : "";
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        const bool numeric = !cell.empty() && end == cell.c_str() + cell.size();
        dat << (c ? " " : "") << (numeric ? format_number(v) : "nan");
        if (numeric) columns[c].push_back(v);
      }
      dat << "\n";
    }
    const fs::path out = dir / (src.stem().string() + ".dat");
    write_file(out, dat.str());
    summary << src.filename().string() << ": " << table.size() - 1 << " rows\n";
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (columns[c].empty()) continue;
      const auto [lo, hi] = std::minmax_element(columns[c].begin(), columns[c].end());
      double mean = 0.0;
      for (double v : columns[c]) mean += v;
      mean /= columns[c].size();
      summary << "  " << header[c] << ": min " << format_number(*lo) << ", max " << format_number(*hi) << ", mean "
              << format_number(mean) << "\n";
    }
    log << "wrote " << out.string() << "\n";
  }
  write_file(dir / "summary.txt", summary.str());
  log << summary.str();
  return kExitOk;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char ch : c) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    } else {
      out += c;
    }
  }
  out += '\n';
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          cell += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.push_back(cell);
        cell.clear();
      } else {
        cell += ch;
      }
    }
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qsh::harness
