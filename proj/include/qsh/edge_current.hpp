#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsh/spectral.hpp"

namespace qsh {

/// Normalized C-infinity bump supported on [E_c - w/2, E_c + w/2]:
///   g(E) = (2 / w) Z^{-1} exp(-1 / (1 - t^2)),  t = 2 (E - E_c) / w,
/// so that the integral of g over E is 1.
struct SmoothDensity {
  double E_c = 0.0;
  double w = 1.0;
  double norm6 = 0.0;  // sum_{j=0..6} sup |g^{(j)}|

  double lo() const { return E_c - 0.5 * w; }
  double hi() const { return E_c + 0.5 * w; }
  double operator()(double E) const;
  /// j-th derivative in E.
  double derivative(int j, double E) const;
};

/// Z = integral of exp(-1/(1 - t^2)) over (-1, 1).
double bump_normalization();

/// Density with support [lo + (c - w/2) |gap|, lo + (c + w/2) |gap|] for
/// centre fraction c and width fraction w of the gap. Throws "g support
/// outside gap" unless the support lies strictly inside the gap.
SmoothDensity bump_g(Interval gap, double center_fraction = 0.5, double width_fraction = 0.5);
SmoothDensity make_density(double E_c, double w);

nlohmann::json to_json(const SmoothDensity& g);

enum class Edge { lower, upper };
std::string to_string(Edge e);

struct EdgeCurrentResult {
  double j_e = 0.0;        // current on the requested edge
  double j_lower = 0.0;
  double j_upper = 0.0;
  double lambda = 1.0;
  int N2 = 0;
  int N_k = 0;
  Edge edge = Edge::lower;
  int cutoff_row = 0;
  SmoothDensity g;
  double comm_norm = 0.0;  // sup_k ||[H(lambda)(k), s^z]|| of the bulk
  /// Current carried by the rows within kLeakageRows of the cutoff; bounds
  /// the error from splitting the two edges.
  double residual_estimate = 0.0;
  std::vector<double> row_density;  // current per row n2
};

nlohmann::json to_json(const EdgeCurrentResult& r);

inline constexpr int kMinRibbonWidth = 32;
inline constexpr int kLeakageRows = 4;
inline constexpr double kMaxLeakage = 1e-6;
inline constexpr int kGapGrid = 64;

struct EdgeOptions {
  int cutoff_row = -1;  // default N2 / 2
  int gap_grid = kGapGrid;
  int threads = 1;
  bool check_leakage = true;
};

/// Spin edge current of a clean ribbon, periodic along direction 1 and open
/// in direction 2 (rows n2 = 0 .. N2-1):
///   j = (2 pi / N_k) sum_k Tr[ Lambda 1/2 {s^z, dH(k)/dk} g(H(k)) ],
/// with H = H(lambda) and the real part of the trace taken, Lambda the rows
/// below (lower) or at/above (upper) the cutoff. The 2 pi makes the current
/// of one chiral channel equal to 1. Throws "g support outside gap" unless
/// supp g sits in the certified Bloch gap of H(lambda), and "increase N2"
/// when the residual estimate exceeds 1e-6.
EdgeCurrentResult edge_current(const ModelSpec& spec, double lambda, int N2, int N_k, const SmoothDensity& g,
                               Edge edge = Edge::lower, const EdgeOptions& opts = {});

/// Charge edge current of the s^z = level block of a conserving spec (the
/// same trace with s^z replaced by the level projection).
double charge_edge_current_per_spin(const ModelSpec& spec, double level, const SmoothDensity& g, int N2, int N_k,
                                    Edge edge = Edge::lower, const EdgeOptions& opts = {});

/// Disordered ribbon: ring of N1 cells closed with twist theta, averaged over
/// `twists` values of theta and over seeds. The velocity is N1 dH/dtheta.
struct DisorderedEdgeCurrent {
  double j_e = 0.0;
  double spread = 0.0;  // max - min over seeds
  std::vector<double> per_seed;
};
DisorderedEdgeCurrent edge_current_disordered(const ModelSpec& spec, double lambda, int N1, int N2, int twists,
                                              const SmoothDensity& g, const std::vector<std::uint64_t>& seeds,
                                              Edge edge = Edge::lower, const EdgeOptions& opts = {});

enum class Coupling { rashba, zeeman };
std::string to_string(Coupling c);
Coupling coupling_from_string(const std::string& name);

struct ScanRow {
  double value = 0.0;
  double comm_norm = 0.0;
  EdgeCurrentResult current;
  double deviation = 0.0;  // |j(value) - j(0)|
  double measured_C = 0.0; // deviation / (norm6 * comm_norm); 0 at value 0
};

struct ScanResult {
  Coupling coupling = Coupling::rashba;
  double baseline = 0.0;            // j at coupling 0
  std::vector<ScanRow> rows;
  double slope = 0.0;               // least-squares line deviation = a + slope * value
  double intercept = 0.0;
  double fit_residual = 0.0;        // max |deviation - fit| / (max - min deviation)
  double C_max = 0.0;
  double C_min = 0.0;
  bool truncated = false;           // a value closed the gap; later values dropped
  std::string truncation_reason;
};

/// Edge current while one s^z-breaking coupling is varied (all else from spec).
ScanResult perturbation_scan(const ModelSpec& spec, Coupling coupling, const std::vector<double>& values,
                             const SmoothDensity& g, int N2, int N_k, const EdgeOptions& opts = {});

nlohmann::json to_json(const ScanResult& s);

}  // namespace qsh
