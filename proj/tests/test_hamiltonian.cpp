#include <gtest/gtest.h>

#include <cmath>

#include "qsh/error.hpp"
#include "qsh/hamiltonian.hpp"
#include "qsh/homotopy.hpp"
#include "support.hpp"

using namespace qsh;
using qsh::fixtures::max_abs;

namespace {

constexpr double kPi = 3.141592653589793;

ModelSpec generic() {
  ModelSpec m = fixtures::km(0.25);
  m.lambda_Ra = 0.13;
  m.lambda_Ze = 0.07;
  m.zeeman_axis = {0.6, 0.0, 0.8};
  m.lambda_v = 0.05;
  return m;
}

}  // namespace

TEST(Hamiltonian, HermitianOnEveryGeometry) {
  ModelSpec m = generic();
  const std::vector<Geometry> geos = {Torus{4, 5}, BlochFiber{0.3, -1.1}, RibbonFiber{0.7, 6}, OpenBox{4, 3},
                                      Ring{5, 4, 0.4}};
  for (const auto& g : geos) {
    m.lambda_dis = supports_disorder(g) ? 0.3 : 0.0;
    const auto h = build_hamiltonian(m, g);
    EXPECT_LT(hermiticity_defect(h.h), 1e-14) << geometry_name(g);
    EXPECT_EQ(h.dim(), cell_counts(g).first * cell_counts(g).second * m.L()) << geometry_name(g);
  }
}

TEST(Hamiltonian, TorusSpectrumIsUnionOfBlochFibers) {
  const ModelSpec m = generic();
  const int N = 5;
  const RVec torus = eigvalsh(build_hamiltonian(m, Torus{N, N}).h);
  const auto fibers = fixtures::bloch_union(m, N);
  ASSERT_EQ(static_cast<std::size_t>(torus.size()), fibers.size());
  for (std::size_t i = 0; i < fibers.size(); ++i) EXPECT_NEAR(torus[i], fibers[i], 1e-10);
}

TEST(Hamiltonian, RibbonSpectrumMatchesRingFibers) {
  // A ring of N1 cells with zero twist is the ribbon at the N1 momenta.
  const ModelSpec m = generic();
  const int N1 = 4, N2 = 5;
  const RVec ring = eigvalsh(build_hamiltonian(m, Ring{N1, N2, 0.0}).h);
  std::vector<double> fibers;
  for (int j = 0; j < N1; ++j) {
    const RVec e = eigvalsh(build_hamiltonian(m, RibbonFiber{2 * kPi * j / N1, N2}).h);
    fibers.insert(fibers.end(), e.data(), e.data() + e.size());
  }
  std::sort(fibers.begin(), fibers.end());
  for (std::size_t i = 0; i < fibers.size(); ++i) EXPECT_NEAR(ring[i], fibers[i], 1e-10);
}

TEST(Hamiltonian, VelocityIsMomentumDerivative) {
  const ModelSpec m = generic();
  const double k1 = 0.37, k2 = -0.81, h = 1e-5;
  const Mat fd = (build_hamiltonian(m, BlochFiber{k1 + h, k2}).h - build_hamiltonian(m, BlochFiber{k1 - h, k2}).h) /
                 (2 * h);
  EXPECT_LT(max_abs(build_velocity(m, BlochFiber{k1, k2}).h - fd), 1e-8);
  const Mat fdr = (build_hamiltonian(m, RibbonFiber{k1 + h, 4}).h - build_hamiltonian(m, RibbonFiber{k1 - h, 4}).h) /
                  (2 * h);
  EXPECT_LT(max_abs(build_velocity(m, RibbonFiber{k1, 4}).h - fdr), 1e-8);
}

TEST(Hamiltonian, RingVelocityIsTwistDerivative) {
  ModelSpec m = generic();
  m.lambda_dis = 0.4;
  const int N1 = 4;
  const double th = 0.3, h = 1e-5;
  const Mat fd = N1 * (build_hamiltonian(m, Ring{N1, 3, th + h}).h - build_hamiltonian(m, Ring{N1, 3, th - h}).h) /
                 (2 * h);
  EXPECT_LT(max_abs(build_velocity(m, Ring{N1, 3, th}).h - fd), 1e-7);
}

TEST(Hamiltonian, MagneticTranslationCovariance) {
  ModelSpec m = generic();
  m.flux_B = Flux(1, 4);
  m.lambda_dis = 0.5;
  const int N1 = 8, N2 = 4;
  const auto V = DisorderField::draw(9, N1, N2, m.R);
  const auto h = build_hamiltonian(m, Torus{N1, N2}, {V});
  for (auto [a1, a2] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {3, 2}}) {
    const Mat U = magnetic_translation(h, m.flux_B, a1, a2);
    EXPECT_LT(max_abs(U * U.adjoint() - Mat::Identity(h.dim(), h.dim())), 1e-12);
    const auto shifted = build_hamiltonian(m, Torus{N1, N2}, {V.translated(a1, a2)});
    EXPECT_LT(max_abs(U * h.h * U.adjoint() - shifted.h), 1e-12) << a1 << "," << a2;
  }
}

TEST(Hamiltonian, FluxQuantizationOnTorus) {
  // Total flux through an N1 x N2 torus: the product of phases around all
  // plaquettes must be trivial, and incompatible sizes are rejected.
  ModelSpec m = fixtures::km();
  m.flux_B = Flux(1, 3);
  EXPECT_THROW(build_hamiltonian(m, Torus{4, 3}), InputError);
  EXPECT_NO_THROW(build_hamiltonian(m, Torus{3, 6}));
}

TEST(Hamiltonian, FluxOneIsGaugeEquivalentToZero) {
  ModelSpec a = fixtures::km(), b = fixtures::km();
  b.flux_B = Flux(1, 1);
  const RVec ea = eigvalsh(build_hamiltonian(a, Torus{4, 4}).h);
  const RVec eb = eigvalsh(build_hamiltonian(b, Torus{4, 4}).h);
  EXPECT_LT((ea - eb).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Hamiltonian, DisorderRejectedOnFibers) {
  ModelSpec m = fixtures::km();
  m.lambda_dis = 0.1;
  EXPECT_THROW(build_hamiltonian(m, BlochFiber{0, 0}), InputError);
  EXPECT_THROW(build_hamiltonian(m, RibbonFiber{0, 4}), InputError);
}

TEST(Hamiltonian, SeedDeterminesSample) {
  ModelSpec m = fixtures::km();
  m.lambda_dis = 0.3;
  m.seed = 5;
  const auto a = build_hamiltonian(m, OpenBox{4, 4});
  const auto b = build_hamiltonian(m, OpenBox{4, 4});
  EXPECT_EQ(max_abs(a.h - b.h), 0.0);
  m.seed = 6;
  EXPECT_GT(max_abs(a.h - build_hamiltonian(m, OpenBox{4, 4}).h), 1e-3);
}

class HomotopyProps : public ::testing::TestWithParam<std::tuple<double, double>> {};

TEST_P(HomotopyProps, EndpointsAndBound) {
  auto [rashba, lambda] = GetParam();
  ModelSpec m = generic();
  m.lambda_Ra = rashba;
  m.lambda_dis = 0.2;
  const auto h = build_hamiltonian(m, Torus{3, 3});
  const Mat sz = h.sz_full(m.s);
  const Homotopy hom = apply_homotopy(h.h, sz, lambda);
  EXPECT_LT(max_abs(hom.h0 + hom.h1 - h.h), 1e-13);
  EXPECT_LT(max_abs(hom.h0 * sz - sz * hom.h0), 1e-13);
  EXPECT_LT(max_abs(hom.h_lambda - (hom.h0 + lambda * hom.h1)), 1e-13);
  EXPECT_LT(hermiticity_defect(hom.h_lambda), 1e-14);
  // s = 1/2 closed form: H + ((1 - lambda)/2) [sigma^z, H] sigma^z.
  const Mat sig = 2.0 * sz;
  const Mat closed = h.h + 0.5 * (1 - lambda) * (sig * h.h - h.h * sig) * sig;
  EXPECT_LT(max_abs(closed - hom.h_lambda), 1e-12);
  const double c = commutator_norm(h.h, sz);
  EXPECT_LE(operator_norm(hom.h1), h1_bound_factor(m.s) * c + 1e-12);
  EXPECT_NEAR(commutator_norm(hom.h_lambda, sz), lambda * c, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Couplings, HomotopyProps,
                         ::testing::Combine(::testing::Values(0.0, 0.05, 0.4), ::testing::Values(0.0, 0.5, 1.0)));

TEST(Homotopy, HigherSpinBound) {
  ModelSpec m;
  m.lattice = Lattice::square;
  m.R = orbitals_per_cell(Lattice::square);
  m.s = Spin{3};
  m.lambda_SO = 0.3;
  m.lambda_Ra = 0.2;
  m.lambda_Ze = 0.3;
  const auto h = build_hamiltonian(m, Torus{3, 3});
  const Mat sz = h.sz_full(m.s);
  const Homotopy hom = apply_homotopy(h.h, sz, 0.3);
  EXPECT_LT(max_abs(hom.h0 * sz - sz * hom.h0), 1e-13);
  EXPECT_LE(operator_norm(hom.h1), h1_bound_factor(m.s) * commutator_norm(h.h, sz) + 1e-12);
  EXPECT_THROW(apply_homotopy(h.h, fixtures::random_hermitian(static_cast<int>(h.dim()), 1), 0.5), InputError);
}
