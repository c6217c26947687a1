#include "qsh/homotopy.hpp"

#include <cmath>

#include "qsh/error.hpp"

namespace qsh {

namespace {

RVec diagonal_of(const Mat& sz) {
  if (sz.rows() != sz.cols()) throw InputError("sz_full must be square");
  const double scale = std::max(1.0, sz.cwiseAbs().maxCoeff());
  RVec d(sz.rows());
  for (Eigen::Index i = 0; i < sz.rows(); ++i) {
    for (Eigen::Index j = 0; j < sz.cols(); ++j) {
      if (i != j && std::abs(sz(i, j)) > 1e-14 * scale) {
        throw InputError("sz_full must be diagonal in the model basis");
      }
    }
    if (std::abs(sz(i, i).imag()) > 1e-14 * scale) throw InputError("sz_full must be real");
    d(i) = sz(i, i).real();
  }
  return d;
}

}  // namespace

Homotopy apply_homotopy(const Mat& h, const Mat& sz_full, double lambda) {
  if (h.rows() != sz_full.rows() || h.cols() != sz_full.cols()) {
    throw InputError("apply_homotopy: dimension mismatch between H and sz_full");
  }
  const RVec d = diagonal_of(sz_full);
  Homotopy out;
  out.h0 = h;
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      if (std::abs(d(i) - d(j)) > 1e-12) out.h0(i, j) = 0.0;
    }
  }
  out.h1 = h - out.h0;
  out.h_lambda = lambda == 1.0 ? h : Mat(out.h0 + lambda * out.h1);
  return out;
}

HamiltonianMatrix apply_homotopy(const HamiltonianMatrix& h, Spin s, double lambda) {
  HamiltonianMatrix out = h;
  out.h = apply_homotopy(h.h, h.sz_full(s), lambda).h_lambda;
  return out;
}

double commutator_norm(const Mat& h, const Mat& sz_full) {
  if (h.rows() != sz_full.rows() || h.cols() != sz_full.cols()) {
    throw InputError("commutator_norm: dimension mismatch");
  }
  const RVec d = diagonal_of(sz_full);
  Mat c(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    for (Eigen::Index i = 0; i < h.rows(); ++i) c(i, j) = h(i, j) * (d(j) - d(i));
  }
  const double n = operator_norm(c);
  return n < 1e-13 * std::max(1.0, h.cwiseAbs().maxCoeff()) ? 0.0 : n;
}

double h1_bound_factor(Spin s) {
  double harmonic = 0.0;
  for (int m = 1; m <= s.two_s; ++m) harmonic += 1.0 / m;
  return 2.0 * harmonic;
}

}  // namespace qsh
