#pragma once

#include "qsh/hamiltonian.hpp"

namespace qsh {

/// Nearest-neighbour normal form of a periodic, spinless block
///   H_l = T1 S1^* + T2 S2^* + T3 S3^* + T4 S4^* + h.c. + W,
/// S3 = S1^* S2, S4 = S1 S2, with (S1 psi)_n = psi_{n - e1}. In hopping
/// language T1, T2, T3, T4 are the amplitudes for the cell displacements
/// (-1,0), (0,-1), (1,-1), (-1,-1) and W the intra-cell block.
///
/// When the original hopping range exceeds one cell the cell is enlarged to
/// m1 x m2 original cells; the enlarged orbital index of (c1, c2, orb) is
/// (c2 * m1 + c1) * R + orb.
struct JacobiForm {
  Mat T1, T2, T3, T4, W;
  int m1 = 1;
  int m2 = 1;
  int R_orig = 1;

  int R() const { return static_cast<int>(W.rows()); }
  /// A(k) = T2 + e^{ik} T3 + e^{-ik} T4.
  Mat A(double k) const;
  /// Diagonal part e^{ik} T1^* + e^{-ik} T1 + W.
  Mat D(double k) const;
};

/// Normal form of an arbitrary finite-range spinless term set.
JacobiForm to_jacobi_form(const TermSet& spinless);

/// Normal form of the spin-l block of an s^z-conserving, clean, flux-free spec.
JacobiForm to_jacobi_form(const ModelSpec& spec, double level);

/// The operator H_l assembled literally from (T1..T4, W) on an N1 x N2 torus
/// of enlarged cells; index (n2 * N1 + n1) * R' + orbital.
Mat assemble_jacobi_torus(const JacobiForm& jf, int N1, int N2);

/// Permutation taking a spinless torus built on (N1*m1) x (N2*m2) original
/// cells to the enlarged-cell ordering: result[i_enlarged] = i_original.
std::vector<Eigen::Index> enlarged_order(const JacobiForm& jf, int N1, int N2);

}  // namespace qsh
