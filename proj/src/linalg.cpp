#include "qsh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "qsh/error.hpp"

namespace qsh {

namespace {

void check_square(const Mat& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw InputError(std::string(who) + ": matrix is not square");
  }
}

thread_local double g_select_radius = 1.0;

lapack_logical inside_disc(const lapack_complex_double* mu) {
  return std::abs(*mu) < g_select_radius ? 1 : 0;
}

// zheevr (MRRR). The divide-and-conquer driver zheevd returns wrong vectors
// for n >= ~400 with some LAPACK/OpenBLAS builds, so it is not used.
EigenSystem eigh_range(const Mat& h, char jobz, char range, double vl, double vu) {
  check_square(h, "eigh");
  const lapack_int n = static_cast<lapack_int>(h.rows());
  EigenSystem out;
  out.values.resize(n);
  if (n == 0) return out;
  Mat work = h;
  Mat z(n, jobz == 'V' ? n : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, jobz, range, 'L', n, work.data(), n, vl, vu, 0, 0, 0.0,
                                         &found, out.values.data(), z.data(), jobz == 'V' ? n : 1, support.data());
  if (info != 0) throw std::runtime_error("zheevr failed, info=" + std::to_string(info));
  out.values.conservativeResize(found);
  if (jobz == 'V') out.vectors = z.leftCols(found);
  return out;
}

}  // namespace

EigenSystem eigh(const Mat& h) { return eigh_range(h, 'V', 'A', 0.0, 0.0); }

RVec eigvalsh(const Mat& h) { return eigh_range(h, 'N', 'A', 0.0, 0.0).values; }

double gershgorin_radius(const Mat& h) {
  if (h.size() == 0) return 0.0;
  return h.cwiseAbs().rowwise().sum().maxCoeff();
}

EigenSystem eigh_window(const Mat& h, double lower, double upper) {
  if (!(upper > lower)) throw InputError("eigh_window: empty interval");
  return eigh_range(h, 'V', 'V', lower, upper);
}

EigenSystem eigh_below(const Mat& h, double upper) {
  const double lower = -gershgorin_radius(h) - 1.0;
  if (!(upper > lower)) return EigenSystem{RVec(0), Mat(h.rows(), 0)};
  return eigh_range(h, 'V', 'V', lower, upper);
}

OrderedSchur ordered_schur(const Mat& t, double radius) {
  check_square(t, "ordered_schur");
  const lapack_int n = static_cast<lapack_int>(t.rows());
  OrderedSchur out;
  out.s = t;
  out.q.resize(n, n);
  out.eigenvalues.resize(n);
  lapack_int sdim = 0;
  g_select_radius = radius;
  const lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'S', inside_disc, n, out.s.data(), n,
                                        &sdim, out.eigenvalues.data(), out.q.data(), n);
  // info == n+1 / n+2 signal reordering trouble from rounding; the selection
  // is then re-counted from the returned diagonal.
  if (info != 0 && info <= n) {
    throw std::runtime_error("zgees failed, info=" + std::to_string(info));
  }
  out.leading = static_cast<int>(sdim);
  return out;
}

double operator_norm(const Mat& a, double tol, int max_iter) {
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Vec v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(gauss(rng), gauss(rng));
  v.normalize();
  double last = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = a.adjoint() * (a * v);
    const double rq = std::real(v.dot(w));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 3 && std::abs(rq - last) <= tol * std::abs(rq)) return std::sqrt(std::max(rq, 0.0));
    last = rq;
  }
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double hermiticity_defect(const Mat& h) {
  const double scale = h.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace qsh
