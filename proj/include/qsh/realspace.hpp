#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "qsh/spectral.hpp"

namespace qsh {

struct ChernEstimate {
  double raw = 0.0;      // window average of the local marker
  int rounded = 0;
  double spread = 0.0;   // standard deviation of the per-cell marker in the window
  int window_cells = 0;
};

inline constexpr double kWindowFraction = 0.25;
inline constexpr double kRoundingThreshold = 0.5;

/// Local Chern marker 4 pi Im <x| P X1 P X2 P |x>, summed over the orbitals of
/// a cell and averaged over the central block of cells holding `window_fraction`
/// of the sample. X1, X2 are the cell coordinates. `frame` spans range(P) in
/// the basis of an OpenBox HamiltonianMatrix. Throws "marker not converged"
/// when |raw - rounded| >= 0.5.
ChernEstimate chern_marker(const Mat& frame, const HamiltonianMatrix& box, double window_fraction = kWindowFraction);

struct LevelMarker {
  double level = 0.0;
  ChernEstimate estimate;
};

struct RealspaceResult {
  std::vector<LevelMarker> levels;
  ChernEstimate total;
  double min_island_gap = 0.0;
  double commutator = 0.0;  // ||[H(lambda), s^z]||
};

/// Spin Chern numbers of one sample: H(lambda) on an N1 x N2 open box with the
/// disorder field drawn from `seed`, Fermi projection at spec.E_g, islands of
/// P s^z P and the marker of each island projection.
RealspaceResult spin_chern_realspace(const ModelSpec& spec, int N1, int N2, std::uint64_t seed, double lambda = 1.0,
                                     double min_island_gap = kDefaultIslandGap,
                                     double window_fraction = kWindowFraction);

struct SeedSweep {
  std::vector<std::uint64_t> seeds;
  std::vector<RealspaceResult> samples;
  std::vector<double> levels;
  std::vector<int> consensus;      // rounded SCh_l shared by every seed
  std::vector<double> mean_raw;
  std::vector<double> spread;      // max - min of raw over seeds, per level
  bool identical = true;
};

/// Realspace spin Chern numbers over several disorder seeds.
SeedSweep spin_chern_disordered(const ModelSpec& spec, int N1, int N2, const std::vector<std::uint64_t>& seeds,
                                double lambda = 1.0, double min_island_gap = kDefaultIslandGap);

struct PlaquetteChern {
  double raw = 0.0;
  int rounded = 0;
  double max_flux = 0.0;  // largest |plaquette phase|
};

/// Lattice Berry-curvature (plaquette) Chern number of the bands below E of a
/// clean, flux-free term set on an N x N Bloch grid:
///   Ch = -(1/2pi) sum_plaquettes arg(U1 U2 U1^-1 U2^-1),  U_mu = det <u(k)|u(k + mu)>.
/// Throws "oracle unreliable" if a plaquette phase exceeds pi/2 or the
/// occupied rank changes across the grid.
PlaquetteChern chern_plaquette(const TermSet& terms, double E, int N);

/// Plaquette Chern number of each s^z block of a clean conserving spec, plus
/// the total over all blocks. Entries ordered by ascending level.
struct PlaquetteSpinChern {
  std::vector<double> levels;
  std::vector<PlaquetteChern> per_level;
  PlaquetteChern total;
};
PlaquetteSpinChern spin_chern_plaquette(const ModelSpec& spec, int N);

nlohmann::json to_json(const ChernEstimate& c);
nlohmann::json to_json(const RealspaceResult& r);
nlohmann::json to_json(const SeedSweep& s);

}  // namespace qsh
