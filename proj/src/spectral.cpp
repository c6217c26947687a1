#include "qsh/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qsh/error.hpp"
#include "qsh/homotopy.hpp"

namespace qsh {

nlohmann::json to_json(const GapReport& g) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isnan(x)) return nullptr;
    return x;
  };
  return {{"E_g", g.E_g},
          {"gap_interval", {g.gap_interval.lo, g.gap_interval.hi}},
          {"min_island_gap", num(g.min_island_gap)},
          {"C_s", num(g.C_s)}};
}

GapReport find_gap(const std::vector<RVec>& spectra, Interval window, double margin, double min_width) {
  if (spectra.empty()) throw InputError("find_gap needs at least one sample");
  if (!(window.lo < window.hi)) throw InputError("find_gap: empty window");
  std::vector<double> all;
  for (const auto& s : spectra) all.insert(all.end(), s.data(), s.data() + s.size());
  std::sort(all.begin(), all.end());

  Interval best{0.0, 0.0};
  bool found = false;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const Interval gap{all[i] + margin, all[i + 1] - margin};
    if (gap.width() <= min_width) continue;
    if (gap.hi <= window.lo || gap.lo >= window.hi) continue;
    if (!found || gap.width() > best.width()) {
      best = gap;
      found = true;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no eigenvalue-free interval wider than " << min_width << " in (" << window.lo << ", " << window.hi
        << ") with sampling margin " << margin << "; eigenvalues in window:";
    int shown = 0;
    for (double e : all) {
      if (e > window.lo - margin && e < window.hi + margin && shown < 12) {
        msg << ' ' << e;
        ++shown;
      }
    }
    throw GuardError(guard::kGapViolated, msg.str());
  }
  GapReport rep;
  rep.gap_interval = best;
  rep.E_g = best.center();
  return rep;
}

GapReport find_gap(const std::vector<HamiltonianMatrix>& samples, Interval window, double margin,
                   double min_width) {
  std::vector<RVec> spectra;
  spectra.reserve(samples.size());
  for (const auto& h : samples) spectra.push_back(eigvalsh(h.h));
  return find_gap(spectra, window, margin, min_width);
}

GapReport bloch_gap_report(const ModelSpec& spec, int N, Interval window, double lambda) {
  if (N < 1) throw InputError("k-grid size must be positive");
  if (spec.lambda_dis != 0.0) throw InputError("Bloch gap report needs a clean model (lambda_dis = 0)");
  const TermSet terms = translation_invariant_terms(spec);
  // Velocity along direction 2 from the same terms with d1 and d2 exchanged.
  TermSet swapped = terms;
  for (auto& h : swapped.hops) std::swap(h.d1, h.d2);

  std::vector<RVec> spectra;
  double max_slope = 0.0;
  double cs = 0.0;
  const double step = 2.0 * std::numbers::pi / N;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double k1 = -std::numbers::pi + step * i;
      const double k2 = -std::numbers::pi + step * j;
      HamiltonianMatrix h = assemble_terms(terms, BlochFiber{k1, k2});
      const Mat sz = h.sz_full(spec.s);
      const Homotopy hom = apply_homotopy(h.h, sz, lambda);
      spectra.push_back(eigvalsh(hom.h_lambda));
      cs = std::max(cs, commutator_norm(hom.h_lambda, sz));
      const Mat v1 = apply_homotopy(velocity_terms(terms, BlochFiber{k1, k2}).h, sz, lambda).h_lambda;
      const Mat v2 = apply_homotopy(velocity_terms(swapped, BlochFiber{k2, k1}).h, sz, lambda).h_lambda;
      max_slope = std::max(max_slope, operator_norm(v1) + operator_norm(v2));
    }
  }
  GapReport rep = find_gap(spectra, window, 0.5 * step * max_slope);
  rep.C_s = cs;
  if (rep.gap_interval.contains(spec.E_g)) rep.E_g = spec.E_g;
  return rep;
}

const Island& ProjectionSet::island(double level) const {
  for (const auto& isl : islands) {
    if (std::abs(isl.level - level) < 1e-9) return isl;
  }
  throw InputError("no island at level " + std::to_string(level));
}

nlohmann::json island_summary(const ProjectionSet& ps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& isl : ps.islands) {
    arr.push_back({{"level", isl.level}, {"interval", {isl.interval.lo, isl.interval.hi}}, {"rank", isl.rank()}});
  }
  return {{"rank_P", ps.rank()},
          {"islands", arr},
          {"island_gaps", ps.island_gaps},
          {"min_island_gap", std::isnan(ps.min_island_gap) ? nlohmann::json(nullptr) : nlohmann::json(ps.min_island_gap)}};
}

ProjectionSet fermi_projection(const Mat& h, double E_g) {
  ProjectionSet ps;
  if (h.rows() == 0) return ps;
  // Only the occupied part is diagonalized; the diameter uses the Gershgorin
  // bound for the top of the spectrum.
  const double top = gershgorin_radius(h);
  double tol = 1e-8 * std::max(2.0 * top, 1.0);
  EigenSystem es = eigh_below(h, E_g + tol);
  if (es.values.size() > 0) tol = 1e-8 * std::max(top - es.values(0), 1.0);
  Eigen::Index occ = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (std::abs(es.values(i) - E_g) < tol) {
      throw GuardError(guard::kFermiTouches,
                       "eigenvalue " + std::to_string(es.values(i)) + " within " + std::to_string(tol) + " of E_g");
    }
    if (es.values(i) < E_g) ++occ;
  }
  ps.frame = es.vectors.leftCols(occ);
  ps.energies = es.values.head(occ);
  return ps;
}

ProjectionSet fermi_projection(const HamiltonianMatrix& h, double E_g) { return fermi_projection(h.h, E_g); }

ProjectionSet psp_islands(ProjectionSet ps, const RVec& sz_diagonal, Spin s, double min_gap) {
  if (sz_diagonal.size() != ps.frame.rows()) throw InputError("psp_islands: s^z dimension mismatch");
  const int n_islands = s.dim();
  const int rank = ps.rank();
  if (rank < n_islands) {
    throw GuardError(guard::kIslandsOverlap,
                     "rank(P) = " + std::to_string(rank) + " cannot host " + std::to_string(n_islands) + " islands");
  }
  const Mat psp = ps.frame.adjoint() * (sz_diagonal.cast<cplx>().asDiagonal() * ps.frame);
  const EigenSystem es = eigh(0.5 * (psp + psp.adjoint()));
  ps.psp_spectrum = es.values;

  // Cut positions: indices of the 2s largest gaps, earliest index winning ties.
  std::vector<int> idx(rank - 1);
  for (int i = 0; i + 1 < rank; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return es.values(a + 1) - es.values(a) > es.values(b + 1) - es.values(b);
  });
  std::vector<int> cuts(idx.begin(), idx.begin() + (n_islands - 1));
  std::sort(cuts.begin(), cuts.end());

  ps.islands.clear();
  ps.island_gaps.clear();
  int begin = 0;
  for (int c = 0; c < n_islands; ++c) {
    const int end = c + 1 < n_islands ? cuts[c] + 1 : rank;
    Island isl;
    isl.level = -s.value() + c;
    isl.interval = {es.values(begin), es.values(end - 1)};
    isl.frame = ps.frame * es.vectors.middleCols(begin, end - begin);
    ps.islands.push_back(std::move(isl));
    if (c + 1 < n_islands) ps.island_gaps.push_back(es.values(end) - es.values(end - 1));
    begin = end;
  }
  ps.min_island_gap = ps.island_gaps.empty() ? std::numeric_limits<double>::infinity()
                                             : *std::min_element(ps.island_gaps.begin(), ps.island_gaps.end());
  if (ps.min_island_gap < min_gap) {
    throw GuardError(guard::kIslandsOverlap, "min island gap " + std::to_string(ps.min_island_gap) +
                                                 " below threshold " + std::to_string(min_gap));
  }
  return ps;
}

DecayFit projection_decay(const Mat& frame, const HamiltonianMatrix& torus, Lattice lattice) {
  const auto* t = std::get_if<Torus>(&torus.geometry);
  if (t == nullptr) throw InputError("projection_decay needs a torus geometry");
  if (frame.rows() != torus.dim()) throw InputError("projection_decay: frame dimension mismatch");
  const LatticeGeometry geo = lattice_geometry(lattice);
  const int L = torus.R * torus.r;
  const int cells = t->N1 * t->N2;

  auto distance = [&](int d1, int d2) {
    double best = std::numeric_limits<double>::infinity();
    for (int w1 = -1; w1 <= 1; ++w1) {
      for (int w2 = -1; w2 <= 1; ++w2) {
        const double e1 = d1 + w1 * t->N1;
        const double e2 = d2 + w2 * t->N2;
        const double x = e1 * geo.a1[0] + e2 * geo.a2[0];
        const double y = e1 * geo.a1[1] + e2 * geo.a2[1];
        best = std::min(best, std::hypot(x, y));
      }
    }
    return best;
  };

  std::vector<double> bin_max;
  std::vector<double> bin_dist;
  double diag_scale = 0.0;
  for (int a = 0; a < cells; ++a) {
    const Mat va = frame.middleRows(static_cast<Eigen::Index>(a) * L, L);
    for (int b = 0; b < cells; ++b) {
      const double norm = (va * frame.middleRows(static_cast<Eigen::Index>(b) * L, L).adjoint()).norm();
      if (a == b) {
        diag_scale = std::max(diag_scale, norm);
        continue;
      }
      const double d = distance(b % t->N1 - a % t->N1, b / t->N1 - a / t->N1);
      const auto bin = static_cast<std::size_t>(std::floor(d));
      if (bin >= bin_max.size()) {
        bin_max.resize(bin + 1, 0.0);
        bin_dist.resize(bin + 1, 0.0);
      }
      if (norm > bin_max[bin]) {
        bin_max[bin] = norm;
        bin_dist[bin] = d;
      }
    }
  }
  const double floor_value = 1e-12 * std::max(diag_scale, 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t b = 0; b < bin_max.size(); ++b) {
    if (bin_max[b] > floor_value) {
      xs.push_back(bin_dist[b]);
      ys.push_back(std::log(bin_max[b]));
    }
  }
  DecayFit fit;
  fit.points = static_cast<int>(xs.size());
  if (xs.empty()) {
    fit.eta = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (xs.size() == 1) {
    throw GuardError(guard::kNoDecay, "only one distance bin above the noise floor; enlarge the torus");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    rss += r * r;
  }
  fit.eta = -slope;
  fit.fit_residual = std::sqrt(rss / n);
  if (!(fit.eta > 0.0)) {
    throw GuardError(guard::kNoDecay, "fitted decay rate " + std::to_string(fit.eta) + " is not positive");
  }
  return fit;
}

}  // namespace qsh
