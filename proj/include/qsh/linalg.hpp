#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qsh {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

struct EigenSystem {
  RVec values;  // ascending
  Mat vectors;  // columns
};

/// Full Hermitian eigendecomposition (LAPACK zheevr). Only the lower triangle is read.
EigenSystem eigh(const Mat& h);

/// Eigenvalues only.
RVec eigvalsh(const Mat& h);

/// Eigenpairs with eigenvalue in (lower, upper].
EigenSystem eigh_window(const Mat& h, double lower, double upper);

/// Eigenpairs with eigenvalue <= upper.
EigenSystem eigh_below(const Mat& h, double upper);

/// Max absolute row sum; bounds the spectral radius.
double gershgorin_radius(const Mat& h);

/// Ordered complex Schur form T = Q S Q^* with the eigenvalues inside the
/// open disc |mu| < radius moved to the leading block (LAPACK zgees + select).
struct OrderedSchur {
  Mat q;
  Mat s;
  Vec eigenvalues;   // diagonal of s, in the reordered order
  int leading = 0;   // number of eigenvalues with |mu| < radius
};
OrderedSchur ordered_schur(const Mat& t, double radius = 1.0);

/// 2-norm of a general matrix by power iteration on A^*A; relative tolerance
/// on the Rayleigh quotient. Falls back to a dense solve if it stalls.
double operator_norm(const Mat& a, double tol = 1e-10, int max_iter = 2000);

/// Largest absolute deviation from Hermiticity relative to max |entry|.
double hermiticity_defect(const Mat& h);

/// 2-norm condition number via singular values.
double condition_number(const Mat& a);

}  // namespace qsh
