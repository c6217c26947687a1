#include "qsh/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qsh/error.hpp"

namespace qsh {

namespace {

std::string at_k(double k) {
  std::ostringstream os;
  os << "k = " << k;
  return os.str();
}

double wrap_phase(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

}  // namespace

Mat transfer_matrix(const JacobiForm& jf, double E, double k) {
  const int n = jf.R();
  const Mat a = jf.A(k);
  const double cond = condition_number(a);
  if (!(cond <= kMaxConditionA)) {
    throw GuardError(guard::kTransferUndefined, at_k(k) + ", cond(A) = " + std::to_string(cond));
  }
  const Mat a_inv = a.partialPivLu().inverse();
  Mat t = Mat::Zero(2 * n, 2 * n);
  t.topLeftCorner(n, n) = (E * Mat::Identity(n, n) - jf.D(k)) * a_inv;
  t.topRightCorner(n, n) = -a.adjoint();
  t.bottomLeftCorner(n, n) = a_inv;
  return t;
}

StableSubspace stable_subspace(const JacobiForm& jf, double E, double k) {
  const int n = jf.R();
  const Mat t = transfer_matrix(jf, E, k);
  const OrderedSchur schur = ordered_schur(t, 1.0);
  StableSubspace out;
  out.margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < schur.eigenvalues.size(); ++i) {
    out.margin = std::min(out.margin, std::abs(std::abs(schur.eigenvalues(i)) - 1.0));
  }
  if (out.margin < kHyperbolicMargin) {
    throw GuardError(guard::kNotHyperbolic, at_k(k) + ", eigenvalue within " + std::to_string(out.margin) +
                                                " of the unit circle");
  }
  int inside = 0;
  for (Eigen::Index i = 0; i < schur.eigenvalues.size(); ++i) {
    if (std::abs(schur.eigenvalues(i)) < 1.0) ++inside;
  }
  if (inside != n || schur.leading != n) {
    throw GuardError(guard::kSymplecticSplit,
                     at_k(k) + ", stable dimension " + std::to_string(inside) + " != " + std::to_string(n));
  }
  // Eigenvalues of a J-unitary matrix come in pairs mu, 1/conj(mu).
  for (Eigen::Index i = 0; i < schur.eigenvalues.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < schur.eigenvalues.size(); ++j) {
      best = std::min(best, std::abs(schur.eigenvalues(i) * std::conj(schur.eigenvalues(j)) - 1.0));
    }
    out.pairing_defect = std::max(out.pairing_defect, best);
  }
  out.frame = schur.q.leftCols(n);
  return out;
}

Mat u_matrix(const Mat& frame) {
  const Eigen::Index n = frame.cols();
  if (frame.rows() != 2 * n) throw InputError("u_matrix: frame must be 2n x n");
  const Mat top = frame.topRows(n);
  const Mat bottom = frame.bottomRows(n);
  const Mat plus = top + kI * bottom;
  const Mat minus = top - kI * bottom;
  const double cond = condition_number(plus);
  if (!(cond <= kMaxConditionA)) {
    throw GuardError(guard::kUUndefined, "cond((I, iI) Phi) = " + std::to_string(cond));
  }
  return minus * plus.partialPivLu().inverse();
}

WindingResult winding_number(const JacobiForm& jf, double E, int N_k, int max_refine) {
  if (N_k < 2) throw InputError("winding_number needs N_k >= 2");
  const double two_pi = 2.0 * std::numbers::pi;
  WindingResult res;

  auto sample = [&](double k) {
    const StableSubspace ss = stable_subspace(jf, E, k);
    const Mat u = u_matrix(ss.frame);
    KSample s;
    s.k = k;
    s.margin = ss.margin;
    s.residual = (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).norm();
    s.phase = std::arg(u.determinant());
    res.samples.push_back(s);
    return s;
  };

  // Sum of principal phase increments over [ka, kb], bisecting large steps.
  auto segment = [&](auto&& self, const KSample& a, const KSample& b, int depth) -> double {
    const double step = wrap_phase(b.phase - a.phase);
    if (std::abs(step) <= kMaxPhaseStep) return step;
    if (depth >= max_refine) {
      throw GuardError(guard::kResolution, "phase step " + std::to_string(step) + " between k = " +
                                               std::to_string(a.k) + " and " + std::to_string(b.k) +
                                               " after " + std::to_string(depth) + " refinements");
    }
    res.refinements = std::max(res.refinements, depth + 1);
    const KSample mid = sample(0.5 * (a.k + b.k));
    return self(self, a, mid, depth + 1) + self(self, mid, b, depth + 1);
  };

  std::vector<KSample> grid;
  grid.reserve(N_k);
  for (int j = 0; j < N_k; ++j) grid.push_back(sample(-std::numbers::pi + two_pi * (j + 0.5) / N_k));
  double total = 0.0;
  for (int j = 0; j < N_k; ++j) {
    KSample b = grid[(j + 1) % N_k];
    if (j + 1 == N_k) b.k += two_pi;  // det U is 2 pi periodic in k
    total += segment(segment, grid[j], b, 0);
  }
  std::sort(res.samples.begin(), res.samples.end(), [](const KSample& x, const KSample& y) { return x.k < y.k; });
  res.raw = total / two_pi;
  res.winding = static_cast<int>(std::lround(res.raw));
  res.phase_defect = std::abs(res.raw - res.winding);
  if (res.phase_defect >= kMaxPhaseDefect) {
    throw GuardError(guard::kWindingUnreliable, "phase defect " + std::to_string(res.phase_defect));
  }
  return res;
}

std::vector<LevelChern> spin_chern_transfer(const ModelSpec& spec, int N_k, int max_refine) {
  std::vector<LevelChern> out;
  for (int i = spec.s.dim() - 1; i >= 0; --i) {
    const double level = spec.s.level(i);
    const JacobiForm jf = to_jacobi_form(spec, level);
    LevelChern lc;
    lc.level = level;
    lc.detail = winding_number(jf, spec.E_g, N_k, max_refine);
    lc.chern = kWindingToChern * lc.detail.winding;
    out.push_back(std::move(lc));
  }
  return out;
}

}  // namespace qsh
