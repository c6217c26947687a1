#include "qsh/realspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsh/error.hpp"
#include "qsh/homotopy.hpp"

namespace qsh {

ChernEstimate chern_marker(const Mat& frame, const HamiltonianMatrix& box, double window_fraction) {
  const auto* g = std::get_if<OpenBox>(&box.geometry);
  if (g == nullptr) throw InputError("chern_marker needs an open box geometry");
  if (frame.rows() != box.dim()) throw InputError("chern_marker: frame dimension mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw InputError("window fraction must be in (0, 1]");
  const int L = box.R * box.r;
  const double c1 = 0.5 * (g->N1 - 1);
  const double c2 = 0.5 * (g->N2 - 1);

  // Centred cell coordinates; a shift of X only adds real diagonal terms.
  RVec x1(box.dim()), x2(box.dim());
  for (int n2 = 0; n2 < g->N2; ++n2) {
    for (int n1 = 0; n1 < g->N1; ++n1) {
      const Eigen::Index base = (static_cast<Eigen::Index>(n2) * g->N1 + n1) * L;
      x1.segment(base, L).setConstant(n1 - c1);
      x2.segment(base, L).setConstant(n2 - c2);
    }
  }
  const Mat m1 = frame.adjoint() * (x1.cast<cplx>().asDiagonal() * frame);
  const Mat m2 = frame.adjoint() * (x2.cast<cplx>().asDiagonal() * frame);
  const Mat m12 = m1 * m2;

  const double side = std::sqrt(window_fraction);
  const int w1 = std::max(1, static_cast<int>(std::lround(g->N1 * side)));
  const int w2 = std::max(1, static_cast<int>(std::lround(g->N2 * side)));
  const int s1 = (g->N1 - w1) / 2;
  const int s2 = (g->N2 - w2) / 2;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(w1) * w2);
  for (int n2 = s2; n2 < s2 + w2; ++n2) {
    for (int n1 = s1; n1 < s1 + w1; ++n1) {
      const Eigen::Index base = (static_cast<Eigen::Index>(n2) * g->N1 + n1) * L;
      const Mat rows = frame.middleRows(base, L);
      const Mat k = rows * m12;
      const double im = (k.array() * rows.conjugate().array()).sum().imag();
      values.push_back(4.0 * std::numbers::pi * im);
    }
  }
  ChernEstimate est;
  est.window_cells = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.raw = sum / values.size();
  double var = 0.0;
  for (double v : values) var += (v - est.raw) * (v - est.raw);
  est.spread = std::sqrt(var / values.size());
  est.rounded = static_cast<int>(std::lround(est.raw));
  if (!(std::abs(est.raw - est.rounded) < kRoundingThreshold)) {
    throw GuardError(guard::kMarkerNotConverged, "window average " + std::to_string(est.raw));
  }
  return est;
}

RealspaceResult spin_chern_realspace(const ModelSpec& spec, int N1, int N2, std::uint64_t seed, double lambda,
                                     double min_island_gap, double window_fraction) {
  ModelSpec sample = spec;
  sample.seed = seed;
  const HamiltonianMatrix h = apply_homotopy(build_hamiltonian(sample, OpenBox{N1, N2}), spec.s, lambda);
  RealspaceResult out;
  out.commutator = commutator_norm(h.h, h.sz_full(spec.s));
  const ProjectionSet ps = psp_islands(fermi_projection(h, spec.E_g), h.sz_diagonal(spec.s), spec.s, min_island_gap);
  out.min_island_gap = ps.min_island_gap;
  for (const auto& isl : ps.islands) {
    out.levels.push_back({isl.level, chern_marker(isl.frame, h, window_fraction)});
  }
  out.total = chern_marker(ps.frame, h, window_fraction);
  return out;
}

SeedSweep spin_chern_disordered(const ModelSpec& spec, int N1, int N2, const std::vector<std::uint64_t>& seeds,
                                double lambda, double min_island_gap) {
  if (seeds.empty()) throw InputError("spin_chern_disordered needs at least one seed");
  SeedSweep sw;
  sw.seeds = seeds;
  for (auto seed : seeds) sw.samples.push_back(spin_chern_realspace(spec, N1, N2, seed, lambda, min_island_gap));
  const auto& first = sw.samples.front();
  for (std::size_t l = 0; l < first.levels.size(); ++l) {
    sw.levels.push_back(first.levels[l].level);
    sw.consensus.push_back(first.levels[l].estimate.rounded);
    double lo = first.levels[l].estimate.raw, hi = lo, sum = 0.0;
    for (const auto& s : sw.samples) {
      const auto& e = s.levels[l].estimate;
      if (e.rounded != sw.consensus.back()) sw.identical = false;
      lo = std::min(lo, e.raw);
      hi = std::max(hi, e.raw);
      sum += e.raw;
    }
    sw.mean_raw.push_back(sum / sw.samples.size());
    sw.spread.push_back(hi - lo);
  }
  return sw;
}

PlaquetteChern chern_plaquette(const TermSet& terms, double E, int N) {
  if (N < 2) throw InputError("plaquette grid needs N >= 2");
  const double step = 2.0 * std::numbers::pi / N;
  std::vector<Mat> frames(static_cast<std::size_t>(N) * N);
  Eigen::Index rank = -1;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const EigenSystem es = eigh(assemble_terms(terms, BlochFiber{-std::numbers::pi + step * i,
                                                                   -std::numbers::pi + step * j}).h);
      Eigen::Index occ = 0;
      while (occ < es.values.size() && es.values(occ) < E) ++occ;
      if (rank >= 0 && occ != rank) {
        throw GuardError(guard::kOracleUnreliable, "occupied rank changes across the Brillouin zone");
      }
      rank = occ;
      frames[static_cast<std::size_t>(i) * N + j] = es.vectors.leftCols(occ);
    }
  }
  auto at = [&](int i, int j) -> const Mat& { return frames[static_cast<std::size_t>(i % N) * N + (j % N)]; };
  auto link = [](const Mat& a, const Mat& b) { return (a.adjoint() * b).determinant(); };
  PlaquetteChern out;
  if (rank == 0) return out;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cplx loop = link(at(i, j), at(i + 1, j)) * link(at(i + 1, j), at(i + 1, j + 1)) *
                        link(at(i + 1, j + 1), at(i, j + 1)) * link(at(i, j + 1), at(i, j));
      const double phase = std::arg(loop);
      out.max_flux = std::max(out.max_flux, std::abs(phase));
      sum += phase;
    }
  }
  out.raw = -sum / (2.0 * std::numbers::pi);
  out.rounded = static_cast<int>(std::lround(out.raw));
  if (out.max_flux > 0.5 * std::numbers::pi) {
    throw GuardError(guard::kOracleUnreliable, "plaquette phase " + std::to_string(out.max_flux) + " exceeds pi/2");
  }
  return out;
}

PlaquetteSpinChern spin_chern_plaquette(const ModelSpec& spec, int N) {
  if (!spec.conserves_sz()) throw InputError("spin_chern_plaquette needs an s^z-conserving spec");
  if (spec.lambda_dis != 0.0 || !spec.flux_B.zero()) throw InputError("spin_chern_plaquette needs a clean, flux-free spec");
  const TermSet terms = translation_invariant_terms(spec);
  PlaquetteSpinChern out;
  for (int i = spec.s.dim() - 1; i >= 0; --i) {
    out.levels.push_back(spec.s.level(i));
    out.per_level.push_back(chern_plaquette(spin_block_terms(terms, i), spec.E_g, N));
  }
  out.total = chern_plaquette(terms, spec.E_g, N);
  return out;
}

nlohmann::json to_json(const ChernEstimate& c) {
  return {{"raw", c.raw}, {"rounded", c.rounded}, {"spread", c.spread}, {"window_cells", c.window_cells}};
}

nlohmann::json to_json(const RealspaceResult& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) levels.push_back({{"level", l.level}, {"chern", to_json(l.estimate)}});
  return {{"levels", levels},
          {"total", to_json(r.total)},
          {"min_island_gap", r.min_island_gap},
          {"commutator_norm", r.commutator}};
}

nlohmann::json to_json(const SeedSweep& s) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (std::size_t i = 0; i < s.seeds.size(); ++i) {
    nlohmann::json entry = to_json(s.samples[i]);
    entry["seed"] = s.seeds[i];
    per_seed.push_back(entry);
  }
  return {{"levels", s.levels},   {"consensus", s.consensus}, {"mean_raw", s.mean_raw},
          {"spread", s.spread},   {"identical", s.identical}, {"samples", per_seed}};
}

}  // namespace qsh
