#pragma once

#include <optional>
#include <string>
#include <variant>

#include "qsh/disorder.hpp"
#include "qsh/lattice.hpp"

namespace qsh {

/// Periodic N1 x N2 sample. Magnetic flux requires q | N1 and q | N2.
struct Torus {
  int N1 = 1;
  int N2 = 1;
};
/// Bloch fiber H(k) at reduced momentum (k1, k2), each in [-pi, pi).
struct BlochFiber {
  double k1 = 0.0;
  double k2 = 0.0;
};
/// Ribbon periodic along direction 1 (momentum k), N2 cells wide, open in direction 2.
struct RibbonFiber {
  double k = 0.0;
  int N2 = 1;
};
/// Open N1 x N2 sample.
struct OpenBox {
  int N1 = 1;
  int N2 = 1;
};
/// Ring of N1 cells along direction 1 closed with twist theta (phase
/// e^{-i theta d1 / N1} on every hop), open in direction 2.
struct Ring {
  int N1 = 1;
  int N2 = 1;
  double theta = 0.0;
};

using Geometry = std::variant<Torus, BlochFiber, RibbonFiber, OpenBox, Ring>;

std::string geometry_name(const Geometry& g);
/// Number of cells along each direction represented by the matrix.
std::pair<int, int> cell_counts(const Geometry& g);
/// True when the geometry admits a disorder field (finite in both directions).
bool supports_disorder(const Geometry& g);

/// Finite Hermitian operator on cells x orbitals x spin levels. Row index of
/// (n1, n2, orb, spin) is ((n2 * C1 + n1) * R + orb) * r + spin, with spin
/// index 0 the level m = +s.
struct HamiltonianMatrix {
  Mat h;
  Geometry geometry;
  int R = 1;
  int r = 1;
  int C1 = 1;
  int C2 = 1;

  Eigen::Index dim() const { return h.rows(); }
  Eigen::Index index(int n1, int n2, int orb, int spin) const {
    return ((static_cast<Eigen::Index>(n2) * C1 + n1) * R + orb) * r + spin;
  }
  /// Diagonal of 1 (x) s^z in this basis.
  RVec sz_diagonal(Spin s) const;
  Mat sz_full(Spin s) const;
};

/// Optional disorder realization. When absent, a field is drawn from spec.seed
/// for geometries that support it (and lambda_dis != 0).
struct BuildOptions {
  std::optional<DisorderField> disorder;
};

/// Assemble the model on a geometry: translation-invariant terms, Peierls
/// phases of flux_B in the Landau gauge (phase exp(-2 pi i B (n2 + d2/2) d1)
/// on the hop n -> n + d), and lambda_dis * V on site.
HamiltonianMatrix build_hamiltonian(const ModelSpec& spec, const Geometry& geometry,
                                    const BuildOptions& options = {});

/// Same assembly from an explicit term set (no disorder).
HamiltonianMatrix assemble_terms(const TermSet& terms, const Geometry& geometry, Flux flux = {});

/// Velocity operator i[H, X1] in the same basis, with X1 the cell coordinate
/// along direction 1. For fibers this is dH/dk; on a ring it is N1 dH/dtheta.
HamiltonianMatrix build_velocity(const ModelSpec& spec, const Geometry& geometry,
                                 const BuildOptions& options = {});
HamiltonianMatrix velocity_terms(const TermSet& terms, const Geometry& geometry, Flux flux = {});

/// Magnetic translation on an N1 x N2 torus in the Landau gauge used above:
/// (U_a psi)(n) = exp(-2 pi i B a2 n1) psi(n - a). Satisfies
/// U_a H[V] U_a^* = H[V translated by a].
Mat magnetic_translation(const HamiltonianMatrix& torus, Flux flux, int a1, int a2);

}  // namespace qsh
