#include <gtest/gtest.h>

#include <cmath>

#include "qsh/error.hpp"
#include "qsh/realspace.hpp"
#include "qsh/spectral.hpp"
#include "qsh/transfer.hpp"
#include "support.hpp"

using namespace qsh;

namespace {

// Two-band Chern insulator on the square lattice:
//   H(k) = sin k1 sx + sin k2 sy + (m + cos k1 + cos k2) sz,
// Chern number +-1 for 0 < |m| < 2 and 0 for |m| > 2.
TermSet two_band(double m) {
  Mat sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  TermSet t;
  t.R = 1;
  t.r = 2;
  t.hops.push_back({0, 0, 1, 0, 0.5 * (sz + kI * sx)});
  t.hops.push_back({0, 0, 0, 1, 0.5 * (sz + kI * sy)});
  t.onsite.push_back({0, m * sz});
  return t;
}

}  // namespace

TEST(Plaquette, TwoBandPhaseDiagram) {
  const int c1 = chern_plaquette(two_band(1.0), 0.0, 24).rounded;
  const int cm1 = chern_plaquette(two_band(-1.0), 0.0, 24).rounded;
  EXPECT_EQ(std::abs(c1), 1);
  EXPECT_EQ(c1, -cm1);
  EXPECT_EQ(chern_plaquette(two_band(3.0), 0.0, 24).rounded, 0);
  EXPECT_EQ(chern_plaquette(two_band(-2.5), 0.0, 24).rounded, 0);
  EXPECT_NEAR(chern_plaquette(two_band(1.0), 0.0, 24).raw, c1, 1e-10);
}

TEST(Plaquette, GaplessIsUnreliable) {
  EXPECT_THROW(chern_plaquette(two_band(2.0), 0.0, 24), GuardError);
}

TEST(Marker, AgreesWithPlaquetteOnTwoBandModel) {
  for (double m : {-1.0, 1.0, 3.0}) {
    const TermSet t = two_band(m);
    const auto box = assemble_terms(t, OpenBox{20, 20});
    const auto ps = fermi_projection(box, 0.0137);
    const ChernEstimate est = chern_marker(ps.frame, box);
    EXPECT_EQ(est.rounded, chern_plaquette(t, 0.0, 24).rounded) << m;
    EXPECT_LT(std::abs(est.raw - est.rounded), 0.1) << m;
  }
}

TEST(Marker, RejectsNonBoxGeometry) {
  const auto torus = build_hamiltonian(fixtures::km(), Torus{4, 4});
  EXPECT_THROW(chern_marker(fermi_projection(torus, 0.0).frame, torus), InputError);
}

TEST(SpinChern, ThreeMethodsAgreeOnKaneMele) {
  const ModelSpec m = fixtures::km(0.3);
  const auto transfer = spin_chern_transfer(m, 256);
  const auto plaq = spin_chern_plaquette(m, 24);
  const auto rs = spin_chern_realspace(m, 14, 14, m.seed);
  ASSERT_EQ(rs.levels.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(transfer[i].level, plaq.levels[i]);
    EXPECT_EQ(transfer[i].level, rs.levels[i].level);
    EXPECT_EQ(transfer[i].chern, plaq.per_level[i].rounded);
    EXPECT_EQ(transfer[i].chern, rs.levels[i].estimate.rounded);
  }
  EXPECT_EQ(plaq.total.rounded, 0);
  EXPECT_EQ(rs.total.rounded, 0);
}

TEST(SpinChern, ConservingRealspaceIsSpinBlockChern) {
  // With s^z conserved, each island is one spin block; its marker matches the
  // marker of the spinless block model on the same box.
  const ModelSpec m = fixtures::km(0.2);
  const auto rs = spin_chern_realspace(m, 12, 12, 0);
  for (const auto& lm : rs.levels) {
    const TermSet block = spin_block_terms(translation_invariant_terms(m), m.s.index_of(lm.level));
    const auto box = assemble_terms(block, OpenBox{12, 12});
    const ChernEstimate est = chern_marker(fermi_projection(box, m.E_g).frame, box);
    EXPECT_NEAR(est.raw, lm.estimate.raw, 1e-8) << lm.level;
  }
}

TEST(SpinChern, HomotopyInvariant) {
  ModelSpec m = fixtures::km(0.3);
  m.lambda_Ra = 0.05;
  std::vector<int> first;
  for (double lambda : {0.0, 0.5, 1.0}) {
    const auto rs = spin_chern_realspace(m, 12, 12, 0, lambda);
    std::vector<int> got;
    for (const auto& l : rs.levels) got.push_back(l.estimate.rounded);
    if (first.empty()) first = got;
    EXPECT_EQ(got, first) << lambda;
  }
}

TEST(SpinChern, DisorderSweepIsReproducible) {
  ModelSpec m = fixtures::km(0.3);
  m.lambda_dis = 0.2;
  const auto a = spin_chern_disordered(m, 10, 10, {1, 2, 3});
  const auto b = spin_chern_disordered(m, 10, 10, {1, 2, 3});
  EXPECT_TRUE(a.identical);
  EXPECT_EQ(a.consensus, b.consensus);
  EXPECT_EQ(a.mean_raw, b.mean_raw);
  ASSERT_EQ(a.samples.size(), 3u);
  EXPECT_NE(a.samples[0].levels[0].estimate.raw, a.samples[1].levels[0].estimate.raw);
}

TEST(SpinChern, GuardsPropagate) {
  ModelSpec m = fixtures::km();
  m.lambda_Ra = 2.0;
  try {
    spin_chern_realspace(m, 12, 12, 0);
    FAIL();
  } catch (const GuardError& e) {
    EXPECT_EQ(e.guard(), guard::kIslandsOverlap);
  }
  EXPECT_THROW(spin_chern_plaquette(m, 12), InputError);
}
