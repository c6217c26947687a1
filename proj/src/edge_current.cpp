#include "qsh/edge_current.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qsh/error.hpp"
#include "qsh/homotopy.hpp"
#include "qsh/parallel.hpp"

namespace qsh {

namespace {

constexpr int kMaxOrder = 6;
constexpr int kSupGrid = 20001;
constexpr double two_pi = 2.0 * std::numbers::pi;

// Derivatives 0..order of phi(t) = exp(-1/(1 - t^2)) on |t| < 1.
std::array<double, kMaxOrder + 1> bump_derivatives(double t, int order) {
  std::array<double, kMaxOrder + 1> phi{};
  const double one_minus = 1.0 - t * t;
  if (!(one_minus > 2e-3)) return phi;  // exp(-500) underflows; all derivatives vanish
  // f = -1/(1 - t^2) = -(1/(1-t) + 1/(1+t)) / 2, so
  // f^{(k)} = -(k! / (1-t)^{k+1} + (-1)^k k! / (1+t)^{k+1}) / 2.
  std::array<double, kMaxOrder + 2> f{};
  double fact = 1.0;
  for (int k = 0; k <= order + 1; ++k) {
    if (k > 0) fact *= k;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    f[k] = -0.5 * (fact / std::pow(1.0 - t, k + 1) + sign * fact / std::pow(1.0 + t, k + 1));
  }
  phi[0] = std::exp(f[0]);
  // phi^{(n+1)} = sum_k C(n,k) f^{(k+1)} phi^{(n-k)}
  for (int n = 0; n < order; ++n) {
    double binom = 1.0;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
      acc += binom * f[k + 1] * phi[n - k];
      binom = binom * (n - k) / (k + 1);
    }
    phi[n + 1] = acc;
  }
  return phi;
}

const std::array<double, kMaxOrder + 1>& bump_sups() {
  static const std::array<double, kMaxOrder + 1> sups = [] {
    std::array<double, kMaxOrder + 1> s{};
    for (int i = 1; i < kSupGrid; ++i) {
      const double t = -1.0 + 2.0 * i / kSupGrid;
      const auto d = bump_derivatives(t, kMaxOrder);
      for (int j = 0; j <= kMaxOrder; ++j) s[j] = std::max(s[j], std::abs(d[j]));
    }
    return s;
  }();
  return sups;
}

void check_inside(const SmoothDensity& g, const Interval& gap) {
  if (!(gap.lo < g.lo() && g.hi() < gap.hi)) {
    throw GuardError(guard::kSupportOutsideGap, "support [" + std::to_string(g.lo()) + ", " + std::to_string(g.hi()) +
                                                    "] not strictly inside gap (" + std::to_string(gap.lo) + ", " +
                                                    std::to_string(gap.hi) + ")");
  }
}

// Per-row contributions Re <psi| P_row J |psi> g(E) summed over eigenpairs,
// with J = (w_i + w_j)/2 V_ij for a diagonal weight w.
void accumulate_rows(const EigenSystem& es, const Mat& v, const RVec& weight, const SmoothDensity& g, int rows,
                     int row_size, std::vector<double>& out) {
  const Mat j = 0.5 * (weight.cast<cplx>().asDiagonal() * v + v * weight.cast<cplx>().asDiagonal());
  for (Eigen::Index n = 0; n < es.values.size(); ++n) {
    const double gn = g(es.values(n));
    if (gn == 0.0) continue;
    const Vec psi = es.vectors.col(n);
    const Vec jpsi = j * psi;
    for (int r = 0; r < rows; ++r) {
      const auto seg = static_cast<Eigen::Index>(r) * row_size;
      out[r] += gn * psi.segment(seg, row_size).dot(jpsi.segment(seg, row_size)).real();
    }
  }
}

void finish(EdgeCurrentResult& res, Edge edge, bool check) {
  const int N2 = static_cast<int>(res.row_density.size());
  res.j_lower = 0.0;
  res.j_upper = 0.0;
  res.residual_estimate = 0.0;
  for (int r = 0; r < N2; ++r) {
    (r < res.cutoff_row ? res.j_lower : res.j_upper) += res.row_density[r];
    if (r >= res.cutoff_row - kLeakageRows && r < res.cutoff_row + kLeakageRows) {
      res.residual_estimate += std::abs(res.row_density[r]);
    }
  }
  res.edge = edge;
  res.j_e = edge == Edge::lower ? res.j_lower : res.j_upper;
  if (check && res.residual_estimate > kMaxLeakage) {
    throw GuardError(guard::kIncreaseWidth, "current within " + std::to_string(kLeakageRows) + " rows of the cutoff is " +
                                                std::to_string(res.residual_estimate));
  }
}

int resolve_cutoff(int N2, const EdgeOptions& opts) {
  const int cut = opts.cutoff_row < 0 ? N2 / 2 : opts.cutoff_row;
  if (cut <= 0 || cut >= N2) throw InputError("cutoff row must lie strictly inside the ribbon");
  return cut;
}

EdgeCurrentResult ribbon_current(const ModelSpec& spec, double lambda, int N2, int N_k, const SmoothDensity& g,
                                 Edge edge, const EdgeOptions& opts, const RVec* level_weight) {
  if (N2 < kMinRibbonWidth) throw InputError("ribbon width N2 must be at least " + std::to_string(kMinRibbonWidth));
  if (N_k < 1) throw InputError("N_k must be positive");
  if (spec.lambda_dis != 0.0) throw InputError("clean ribbon needs lambda_dis = 0; use the disordered ring path");
  if (!spec.flux_B.zero()) throw InputError("edge current with magnetic flux is not supported");

  const GapReport gap = bloch_gap_report(spec, opts.gap_grid, {g.lo(), g.hi()}, lambda);
  check_inside(g, gap.gap_interval);

  EdgeCurrentResult res;
  res.lambda = lambda;
  res.N2 = N2;
  res.N_k = N_k;
  res.g = g;
  res.cutoff_row = resolve_cutoff(N2, opts);
  res.comm_norm = gap.C_s;

  const TermSet terms = translation_invariant_terms(spec);
  const int row_size = spec.L();
  std::vector<std::vector<double>> per_k(N_k, std::vector<double>(N2, 0.0));
  parallel_for(N_k, opts.threads, [&](int j) {
    const double k = -std::numbers::pi + two_pi * j / N_k;
    const HamiltonianMatrix h = assemble_terms(terms, RibbonFiber{k, N2});
    const Mat sz = h.sz_full(spec.s);
    const Mat hl = apply_homotopy(h.h, sz, lambda).h_lambda;
    const Mat vl = apply_homotopy(velocity_terms(terms, RibbonFiber{k, N2}).h, sz, lambda).h_lambda;
    const RVec weight = level_weight != nullptr ? *level_weight : h.sz_diagonal(spec.s);
    accumulate_rows(eigh_window(hl, g.lo(), g.hi()), vl, weight, g, N2, row_size, per_k[j]);
  });
  res.row_density.assign(N2, 0.0);
  for (int j = 0; j < N_k; ++j) {
    for (int r = 0; r < N2; ++r) res.row_density[r] += per_k[j][r];
  }
  for (double& x : res.row_density) x *= two_pi / N_k;
  finish(res, edge, opts.check_leakage);
  return res;
}

double linear_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& intercept) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  slope = sxx > 0 ? sxy / sxx : 0.0;
  intercept = my - slope * mx;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - (intercept + slope * x[i])));
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  return range > 0 ? worst / range : 0.0;
}

}  // namespace

double bump_normalization() {
  static const double z = [] {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate([](double t) { return std::exp(-1.0 / (1.0 - t * t)); }, -1.0, 1.0);
  }();
  return z;
}

double SmoothDensity::operator()(double E) const { return derivative(0, E); }

double SmoothDensity::derivative(int j, double E) const {
  if (j < 0 || j > kMaxOrder) throw InputError("derivative order must be 0..6");
  const double t = 2.0 * (E - E_c) / w;
  if (!(std::abs(t) < 1.0)) return 0.0;
  return std::pow(2.0 / w, j + 1) / bump_normalization() * bump_derivatives(t, j)[j];
}

SmoothDensity make_density(double E_c, double w) {
  if (!(w > 0.0)) throw InputError("density width must be positive");
  SmoothDensity g;
  g.E_c = E_c;
  g.w = w;
  const auto& sups = bump_sups();
  for (int j = 0; j <= kMaxOrder; ++j) g.norm6 += std::pow(2.0 / w, j + 1) / bump_normalization() * sups[j];
  return g;
}

SmoothDensity bump_g(Interval gap, double center_fraction, double width_fraction) {
  if (!(gap.width() > 0.0)) throw InputError("bump_g needs a non-empty gap");
  const SmoothDensity g = make_density(gap.lo + center_fraction * gap.width(), width_fraction * gap.width());
  check_inside(g, gap);
  return g;
}

nlohmann::json to_json(const SmoothDensity& g) {
  return {{"E_c", g.E_c}, {"w", g.w}, {"support", {g.lo(), g.hi()}}, {"norm6", g.norm6}};
}

std::string to_string(Edge e) { return e == Edge::lower ? "lower" : "upper"; }

nlohmann::json to_json(const EdgeCurrentResult& r) {
  return {{"j_e", r.j_e},
          {"j_lower", r.j_lower},
          {"j_upper", r.j_upper},
          {"lambda", r.lambda},
          {"N2", r.N2},
          {"N_k", r.N_k},
          {"edge", to_string(r.edge)},
          {"cutoff_row", r.cutoff_row},
          {"g", to_json(r.g)},
          {"comm_norm", r.comm_norm},
          {"residual_estimate", r.residual_estimate}};
}

EdgeCurrentResult edge_current(const ModelSpec& spec, double lambda, int N2, int N_k, const SmoothDensity& g,
                               Edge edge, const EdgeOptions& opts) {
  return ribbon_current(spec, lambda, N2, N_k, g, edge, opts, nullptr);
}

double charge_edge_current_per_spin(const ModelSpec& spec, double level, const SmoothDensity& g, int N2, int N_k,
                                    Edge edge, const EdgeOptions& opts) {
  if (!spec.conserves_sz()) throw InputError("per-spin charge current needs an s^z-conserving spec");
  const int idx = spec.s.index_of(level);
  const int L = spec.L();
  RVec weight = RVec::Zero(static_cast<Eigen::Index>(N2) * L);
  for (Eigen::Index i = idx; i < weight.size(); i += spec.r()) weight(i) = 1.0;
  return ribbon_current(spec, 1.0, N2, N_k, g, edge, opts, &weight).j_e;
}

DisorderedEdgeCurrent edge_current_disordered(const ModelSpec& spec, double lambda, int N1, int N2, int twists,
                                              const SmoothDensity& g, const std::vector<std::uint64_t>& seeds,
                                              Edge edge, const EdgeOptions& opts) {
  if (N2 < kMinRibbonWidth) throw InputError("ribbon width N2 must be at least " + std::to_string(kMinRibbonWidth));
  if (N1 < 1 || twists < 1) throw InputError("ring length and twist count must be positive");
  if (seeds.empty()) throw InputError("at least one seed is required");
  const int cutoff = resolve_cutoff(N2, opts);
  const int row_size = N1 * spec.L();  // one row n2 holds N1 cells
  DisorderedEdgeCurrent out;
  for (auto seed : seeds) {
    ModelSpec sample = spec;
    sample.seed = seed;
    const DisorderField field = DisorderField::draw(seed, N1, N2, spec.R);
    BuildOptions bo;
    bo.disorder = field;

    // Gap of the same realization without edges.
    const HamiltonianMatrix torus = apply_homotopy(build_hamiltonian(sample, Torus{N1, N2}, bo), spec.s, lambda);
    const GapReport gap = find_gap(std::vector<RVec>{eigvalsh(torus.h)}, {g.lo(), g.hi()});
    check_inside(g, gap.gap_interval);

    std::vector<std::vector<double>> per_twist(twists, std::vector<double>(N2, 0.0));
    parallel_for(twists, opts.threads, [&](int m) {
      const Ring ring{N1, N2, two_pi * m / twists};
      const HamiltonianMatrix h = apply_homotopy(build_hamiltonian(sample, ring, bo), spec.s, lambda);
      const Mat v = apply_homotopy(build_velocity(sample, ring, bo), spec.s, lambda).h;
      accumulate_rows(eigh_window(h.h, g.lo(), g.hi()), v, h.sz_diagonal(spec.s), g, N2, row_size, per_twist[m]);
    });
    EdgeCurrentResult res;
    res.cutoff_row = cutoff;
    res.row_density.assign(N2, 0.0);
    for (int m = 0; m < twists; ++m) {
      for (int r = 0; r < N2; ++r) res.row_density[r] += per_twist[m][r];
    }
    for (double& x : res.row_density) x *= two_pi / (static_cast<double>(N1) * twists);
    finish(res, edge, false);
    out.per_seed.push_back(res.j_e);
  }
  double sum = 0.0;
  for (double x : out.per_seed) sum += x;
  out.j_e = sum / out.per_seed.size();
  const auto [lo, hi] = std::minmax_element(out.per_seed.begin(), out.per_seed.end());
  out.spread = *hi - *lo;
  return out;
}

std::string to_string(Coupling c) { return c == Coupling::rashba ? "rashba" : "zeeman"; }

Coupling coupling_from_string(const std::string& name) {
  if (name == "rashba") return Coupling::rashba;
  if (name == "zeeman") return Coupling::zeeman;
  throw InputError("unknown coupling '" + name + "' (expected rashba or zeeman)");
}

ScanResult perturbation_scan(const ModelSpec& spec, Coupling coupling, const std::vector<double>& values,
                             const SmoothDensity& g, int N2, int N_k, const EdgeOptions& opts) {
  auto with = [&](double v) {
    ModelSpec s = spec;
    (coupling == Coupling::rashba ? s.lambda_Ra : s.lambda_Ze) = v;
    return s;
  };
  ScanResult out;
  out.coupling = coupling;
  out.baseline = edge_current(with(0.0), 1.0, N2, N_k, g, Edge::lower, opts).j_e;
  for (double v : values) {
    ScanRow row;
    row.value = v;
    try {
      row.current = edge_current(with(v), 1.0, N2, N_k, g, Edge::lower, opts);
    } catch (const GuardError& e) {
      if (e.guard() != guard::kGapViolated && e.guard() != guard::kSupportOutsideGap) throw;
      out.truncated = true;
      out.truncation_reason = e.what();
      break;
    }
    row.comm_norm = row.current.comm_norm;
    row.deviation = std::abs(row.current.j_e - out.baseline);
    if (v != 0.0 && row.comm_norm > 0.0) row.measured_C = row.deviation / (g.norm6 * row.comm_norm);
    out.rows.push_back(std::move(row));
  }
  std::vector<double> xs, ys;
  bool first_c = true;
  for (const auto& r : out.rows) {
    xs.push_back(r.value);
    ys.push_back(r.deviation);
    if (r.value != 0.0 && r.comm_norm > 0.0) {
      out.C_max = first_c ? r.measured_C : std::max(out.C_max, r.measured_C);
      out.C_min = first_c ? r.measured_C : std::min(out.C_min, r.measured_C);
      first_c = false;
    }
  }
  if (xs.size() >= 2) out.fit_residual = linear_fit(xs, ys, out.slope, out.intercept);
  return out;
}

nlohmann::json to_json(const ScanResult& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"value", r.value},
                    {"comm_norm", r.comm_norm},
                    {"j_e_lower", r.current.j_lower},
                    {"j_e_upper", r.current.j_upper},
                    {"deviation", r.deviation},
                    {"measured_C", r.measured_C},
                    {"residual_estimate", r.current.residual_estimate}});
  }
  return {{"coupling", to_string(s.coupling)},
          {"baseline", s.baseline},
          {"rows", rows},
          {"slope", s.slope},
          {"intercept", s.intercept},
          {"fit_residual", s.fit_residual},
          {"C_max", s.C_max},
          {"C_min", s.C_min},
          {"C_ratio", s.C_min > 0 ? s.C_max / s.C_min : 0.0},
          {"truncated", s.truncated},
          {"truncation_reason", s.truncation_reason}};
}

}  // namespace qsh
