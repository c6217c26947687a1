#pragma once

#include <limits>
#include <vector>

#include <json.hpp>

#include "qsh/hamiltonian.hpp"

namespace qsh {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

/// A spectral gap certified over a set of sampled spectra.
struct GapReport {
  double E_g = 0.0;
  Interval gap_interval;
  double min_island_gap = std::numeric_limits<double>::quiet_NaN();
  double C_s = std::numeric_limits<double>::quiet_NaN();
};

nlohmann::json to_json(const GapReport& g);

/// Widest eigenvalue-free interval between two sampled eigenvalues that meets
/// `window`. Each eigenvalue is widened by `margin` on both sides (sampling
/// uncertainty). The returned E_g is the gap midpoint. Throws GuardError
/// "gap hypothesis violated" if nothing wider than `min_width` exists.
GapReport find_gap(const std::vector<RVec>& spectra, Interval window, double margin = 0.0,
                   double min_width = 1e-9);
GapReport find_gap(const std::vector<HamiltonianMatrix>& samples, Interval window, double margin = 0.0,
                   double min_width = 1e-9);

/// Gap of a clean, flux-free model (optionally deformed by the homotopy at
/// `lambda`) from its Bloch spectrum on an N x N grid. The margin is the
/// first-order sampling bound (pi / N) max_k (||d1 H|| + ||d2 H||).
GapReport bloch_gap_report(const ModelSpec& spec, int N, Interval window, double lambda = 1.0);

/// One cluster of the spectrum of P s^z P on range(P).
struct Island {
  double level = 0.0;  // s^z level the cluster is attached to
  Interval interval;   // [min, max] of the cluster eigenvalues
  Mat frame;           // orthonormal columns spanning range(P_l)

  int rank() const { return static_cast<int>(frame.cols()); }
  Mat projector() const { return frame * frame.adjoint(); }
};

/// Fermi projection and its decomposition by the spectrum of P s^z P.
/// Projections are stored as isometries; projector() materializes them.
struct ProjectionSet {
  Mat frame;        // occupied eigenvectors of H (columns)
  RVec energies;    // their energies
  RVec psp_spectrum;
  std::vector<Island> islands;
  std::vector<double> island_gaps;
  double min_island_gap = std::numeric_limits<double>::quiet_NaN();

  int rank() const { return static_cast<int>(frame.cols()); }
  Mat projector() const { return frame * frame.adjoint(); }
  const Island& island(double level) const;
};

nlohmann::json island_summary(const ProjectionSet& ps);

/// Spectral projection onto energies below E_g. Throws "Fermi level touches
/// spectrum" when an eigenvalue lies within 1e-8 x (spectral diameter) of E_g;
/// the top of the spectrum enters the diameter through its Gershgorin bound.
ProjectionSet fermi_projection(const Mat& h, double E_g);
ProjectionSet fermi_projection(const HamiltonianMatrix& h, double E_g);

inline constexpr double kDefaultIslandGap = 0.05;

/// Split range(P) by the spectrum of P s^z P into 2s + 1 islands: cut the
/// sorted eigenvalues at their 2s largest gaps and label clusters -s..s in
/// order. Throws "spin spectrum islands not separated" if the smallest cut is
/// below `min_gap`.
ProjectionSet psp_islands(ProjectionSet ps, const RVec& sz_diagonal, Spin s, double min_gap = kDefaultIslandGap);

struct DecayFit {
  double eta = 0.0;           // fitted decay rate; +inf when no off-diagonal weight
  double fit_residual = 0.0;  // RMS residual of the log fit
  int points = 0;
};

/// Exponential decay of cell blocks ||<n|P|m>|| with real-space distance on a
/// torus (minimum image). Fits log(max block norm per unit distance bin).
DecayFit projection_decay(const Mat& frame, const HamiltonianMatrix& torus, Lattice lattice);

}  // namespace qsh
