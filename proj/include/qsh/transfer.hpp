#pragma once

#include <vector>

#include "qsh/jacobi.hpp"

namespace qsh {

/// Transfer matrix of (H_l - E) psi = 0 for psi_n = e^{-i k n1} phi_{n2}:
///   T(E, k) = [[(E - D(k)) A(k)^{-1}, -A(k)^*], [A(k)^{-1}, 0]],
/// acting on (A phi_{n+1}, phi_n). It is J-unitary, T^* J T = J with
/// J = [[0, -1], [1, 0]].
Mat transfer_matrix(const JacobiForm& jf, double E, double k);

inline constexpr double kMaxConditionA = 1e12;
inline constexpr double kHyperbolicMargin = 1e-6;

/// Contracting invariant subspace of T: an orthonormal 2R' x R' frame.
struct StableSubspace {
  Mat frame;
  double margin = 0.0;  // min over eigenvalues of ||mu| - 1|
  double pairing_defect = 0.0;  // max distance of mu from the set {1 / conj(mu')}
};

/// Throws "transfer matrix undefined at k" when cond(A(k)) > 1e12, "not
/// hyperbolic" when an eigenvalue is within 1e-6 of the unit circle, and
/// "symplectic split violated" when the stable dimension is not R'.
StableSubspace stable_subspace(const JacobiForm& jf, double E, double k);

/// U = (I, -iI) Phi [(I, iI) Phi]^{-1}; unitary for a Lagrangian frame Phi.
/// Throws "U undefined at k" if (I, iI) Phi is singular.
Mat u_matrix(const Mat& frame);

struct KSample {
  double k = 0.0;
  double margin = 0.0;
  double residual = 0.0;  // ||U^* U - I||
  double phase = 0.0;     // arg det U
};

struct WindingResult {
  int winding = 0;
  double raw = 0.0;            // sum of phase increments / 2 pi
  double phase_defect = 0.0;   // |raw - winding|
  int refinements = 0;         // bisection levels used
  std::vector<KSample> samples;
};

inline constexpr double kMaxPhaseStep = 0.5 * 3.141592653589793;
inline constexpr double kMaxPhaseDefect = 0.05;

/// Winding of det U(k) around k in [-pi, pi) on the grid
/// k_j = -pi + 2 pi (j + 1/2) / N_k. Intervals whose phase increment exceeds
/// pi/2 are bisected, at most `max_refine` times; a remaining large step
/// throws "insufficient k-resolution".
WindingResult winding_number(const JacobiForm& jf, double E, int N_k, int max_refine = 2);

struct LevelChern {
  double level = 0.0;
  int chern = 0;
  WindingResult detail;
};

/// Chern number of each s^z block of a clean, s^z-conserving spec from the
/// winding of its transfer matrix at E = spec.E_g.
std::vector<LevelChern> spin_chern_transfer(const ModelSpec& spec, int N_k, int max_refine = 2);

/// Orientation: the Chern number of a block equals this factor times the winding.
inline constexpr int kWindingToChern = 1;

}  // namespace qsh
