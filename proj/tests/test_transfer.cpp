#include <gtest/gtest.h>

#include <cmath>

#include "qsh/error.hpp"
#include "qsh/jacobi.hpp"
#include "qsh/transfer.hpp"
#include "support.hpp"

using namespace qsh;
using qsh::fixtures::max_abs;

namespace {

constexpr double kPi = 3.141592653589793;

Mat symplectic_j(int R) {
  Mat J = Mat::Zero(2 * R, 2 * R);
  J.topRightCorner(R, R) = -Mat::Identity(R, R);
  J.bottomLeftCorner(R, R) = Mat::Identity(R, R);
  return J;
}

}  // namespace

TEST(Jacobi, ReassemblyMatchesLatticeBuilder) {
  for (double level : {0.5, -0.5}) {
    ModelSpec m = fixtures::km(0.3);
    m.lambda_v = 0.1;
    const JacobiForm jf = to_jacobi_form(m, level);
    const int N1 = 4, N2 = 5;
    const Mat lit = assemble_jacobi_torus(jf, N1, N2);
    const TermSet block = spin_block_terms(translation_invariant_terms(m), m.s.index_of(level));
    const auto ref = assemble_terms(block, Torus{N1 * jf.m1, N2 * jf.m2});
    const auto order = enlarged_order(jf, N1, N2);
    Mat permuted(lit.rows(), lit.cols());
    for (Eigen::Index i = 0; i < lit.rows(); ++i)
      for (Eigen::Index j = 0; j < lit.cols(); ++j) permuted(i, j) = ref.h(order[i], order[j]);
    EXPECT_LT(max_abs(lit - permuted), 1e-13) << level;
  }
}

TEST(Jacobi, EnlargesLongRangeTermSets) {
  // Third-neighbour hop along direction 1 on a square lattice needs m1 = 2.
  TermSet t;
  t.R = 1;
  t.r = 1;
  t.hops.push_back({0, 0, 1, 0, Mat::Constant(1, 1, 1.0)});
  t.hops.push_back({0, 0, 0, 1, Mat::Constant(1, 1, 1.0)});
  t.hops.push_back({0, 0, 2, 0, Mat::Constant(1, 1, cplx(0.0, 0.3))});
  const JacobiForm jf = to_jacobi_form(t);
  EXPECT_EQ(jf.m1 * jf.m2, 2);
  const int N1 = 3, N2 = 4;
  const Mat lit = assemble_jacobi_torus(jf, N1, N2);
  const auto ref = assemble_terms(t, Torus{N1 * jf.m1, N2 * jf.m2});
  const auto order = enlarged_order(jf, N1, N2);
  Mat permuted(lit.rows(), lit.cols());
  for (Eigen::Index i = 0; i < lit.rows(); ++i)
    for (Eigen::Index j = 0; j < lit.cols(); ++j) permuted(i, j) = ref.h(order[i], order[j]);
  EXPECT_LT(max_abs(lit - permuted), 1e-13);
}

TEST(Transfer, JUnitaryAndPairing) {
  const JacobiForm jf = to_jacobi_form(fixtures::km(), 0.5);
  const Mat J = symplectic_j(jf.R());
  for (double k : {-2.9, -1.0, 0.1, 1.3, 2.5}) {
    const Mat T = transfer_matrix(jf, 0.0, k);
    EXPECT_LT(max_abs(T.adjoint() * J * T - J), 1e-10) << k;
    const auto ss = stable_subspace(jf, 0.0, k);
    EXPECT_EQ(ss.frame.cols(), jf.R());
    EXPECT_LT(ss.pairing_defect, 1e-6);
    EXPECT_GT(ss.margin, 1e-3);
  }
}

TEST(Transfer, PropagatesBulkSolutions) {
  // Every eigenvalue E of the Bloch block at (k1, k2) makes mu = e^{+-i k2}
  // an eigenvalue of T(E, k1).
  const ModelSpec m = fixtures::km();
  const JacobiForm jf = to_jacobi_form(m, -0.5);
  const TermSet block = spin_block_terms(translation_invariant_terms(m), m.s.index_of(-0.5));
  for (auto [k1, k2] : std::vector<std::pair<double, double>>{{0.4, 1.1}, {-2.0, 0.3}, {1.7, -2.6}}) {
    const RVec E = eigvalsh(assemble_terms(block, BlochFiber{k1, k2}).h);
    for (int b = 0; b < E.size(); ++b) {
      const Mat T = transfer_matrix(jf, E[b], k1);
      const Vec mu = Eigen::ComplexEigenSolver<Mat>(T).eigenvalues();
      double best = 1e9;
      for (int i = 0; i < mu.size(); ++i) {
        best = std::min({best, std::abs(mu[i] - std::polar(1.0, k2)), std::abs(mu[i] - std::polar(1.0, -k2))});
      }
      EXPECT_LT(best, 1e-8) << k1 << " " << k2 << " band " << b;
    }
  }
}

TEST(Transfer, UnitaryUOnWholeGrid) {
  const ModelSpec m = fixtures::km();
  for (double level : {-0.5, 0.5}) {
    const JacobiForm jf = to_jacobi_form(m, level);
    const auto w = winding_number(jf, 0.0, 128);
    ASSERT_EQ(w.samples.size(), 128u);
    for (const auto& s : w.samples) EXPECT_LT(s.residual, 1e-8) << s.k;
  }
}

TEST(Transfer, HalfShiftedGrid) {
  const JacobiForm jf = to_jacobi_form(fixtures::km(), 0.5);
  const auto w = winding_number(jf, 0.0, 8);
  ASSERT_FALSE(w.samples.empty());
  EXPECT_NEAR(w.samples.front().k, -kPi + 2 * kPi * 0.5 / 8, 1e-14);
}

TEST(Transfer, KaneMeleBlocksWindOppositely) {
  const auto levels = spin_chern_transfer(fixtures::km(), 512);
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_EQ(levels[0].level, -0.5);
  EXPECT_EQ(levels[0].chern + levels[1].chern, 0);
  EXPECT_EQ(std::abs(levels[0].chern), 1);
  for (const auto& l : levels) EXPECT_LT(l.detail.phase_defect, 0.05);
}

TEST(Transfer, TrivialInsulatorHasZeroWinding) {
  ModelSpec m = fixtures::km(0.05);
  m.lambda_v = 1.0;  // staggered potential dominates
  for (const auto& l : spin_chern_transfer(m, 256)) EXPECT_EQ(l.chern, 0);
}

TEST(Transfer, ConvergedInNk) {
  const ModelSpec m = fixtures::km(0.15);
  const auto a = spin_chern_transfer(m, 256);
  const auto b = spin_chern_transfer(m, 1024);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].chern, b[i].chern);
    EXPECT_NEAR(a[i].detail.raw, b[i].detail.raw, 1e-8);
  }
}

TEST(Transfer, Guards) {
  ModelSpec m = fixtures::km(0.0);  // graphene: gapless at the Dirac points
  const JacobiForm jf = to_jacobi_form(m, 0.5);
  try {
    winding_number(jf, 0.0, 300);
    FAIL() << "expected a guard";
  } catch (const GuardError& e) {
    SUCCEED() << e.guard();
  }
  // E inside a band: unimodular eigenvalues.
  const JacobiForm km = to_jacobi_form(fixtures::km(), 0.5);
  try {
    stable_subspace(km, 1.5, 0.3);
    FAIL() << "expected a guard";
  } catch (const GuardError& e) {
    EXPECT_EQ(e.guard(), guard::kNotHyperbolic);
  }
  ModelSpec rashba = fixtures::km();
  rashba.lambda_Ra = 0.1;
  EXPECT_THROW(spin_chern_transfer(rashba, 64), InputError);
}

TEST(Transfer, SingularHoppingBlockIsReported) {
  // The Kane-Mele inter-row block A(k) is singular at k = 0.
  const JacobiForm jf = to_jacobi_form(fixtures::km(), 0.5);
  try {
    transfer_matrix(jf, 0.0, 0.0);
    FAIL() << "expected a guard";
  } catch (const GuardError& e) {
    EXPECT_EQ(e.guard(), guard::kTransferUndefined);
  }
}

TEST(Transfer, CoarseGridRequestsResolution) {
  const JacobiForm jf = to_jacobi_form(fixtures::km(0.02), 0.5);
  try {
    winding_number(jf, 0.0, 4, 0);
    FAIL() << "expected a guard";
  } catch (const GuardError& e) {
    EXPECT_TRUE(e.guard() == guard::kResolution || e.guard() == guard::kWindingUnreliable) << e.guard();
  }
}
