#include "qsh/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "qsh/error.hpp"

namespace qsh {

namespace {

constexpr int kSearch = 3;
constexpr double kDistTol = 1e-9;

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }

double length(const Vec2& a) { return std::hypot(a[0], a[1]); }

std::vector<double> distance_shells(const LatticeGeometry& geo) {
  std::vector<double> dists;
  const int R = static_cast<int>(geo.orbitals.size());
  for (int a = 0; a < R; ++a) {
    for (int b = 0; b < R; ++b) {
      for (int d1 = -kSearch; d1 <= kSearch; ++d1) {
        for (int d2 = -kSearch; d2 <= kSearch; ++d2) {
          const double d = length(sub(geo.position(d1, d2, b), geo.position(0, 0, a)));
          if (d < kDistTol) continue;
          if (std::none_of(dists.begin(), dists.end(),
                           [d](double x) { return std::abs(x - d) < kDistTol; })) {
            dists.push_back(d);
          }
        }
      }
    }
  }
  std::sort(dists.begin(), dists.end());
  return dists;
}

}  // namespace

Vec2 LatticeGeometry::position(int n1, int n2, int orb) const {
  const Vec2& o = orbitals.at(orb);
  return {n1 * a1[0] + n2 * a2[0] + o[0], n1 * a1[1] + n2 * a2[1] + o[1]};
}

LatticeGeometry lattice_geometry(Lattice lattice) {
  const double h = std::sqrt(3.0) / 2.0;
  switch (lattice) {
    case Lattice::honeycomb:
      // A at the origin; B one bond length above A, booked one cell along a1 so
      // that all three A-B bonds cross cell boundaries (d = (-1,0), (0,-1), (-1,-1)).
      return {{1.0, 0.0}, {0.5, h}, {{0.0, 0.0}, {1.0, 1.0 / std::sqrt(3.0)}}};
    case Lattice::square:
      return {{1.0, 0.0}, {0.0, 1.0}, {{0.0, 0.0}}};
    case Lattice::triangular:
      return {{1.0, 0.0}, {0.5, h}, {{0.0, 0.0}}};
  }
  throw InputError("unknown lattice");
}

int TermSet::range1() const {
  int m = 0;
  for (const auto& h : hops) m = std::max(m, std::abs(h.d1));
  return m;
}

int TermSet::range2() const {
  int m = 0;
  for (const auto& h : hops) m = std::max(m, std::abs(h.d2));
  return m;
}

std::vector<Bond> neighbour_bonds(const LatticeGeometry& geo, int shell) {
  const auto shells = distance_shells(geo);
  if (shell < 1 || shell > static_cast<int>(shells.size())) throw InputError("bad neighbour shell");
  const double target = shells[shell - 1];
  std::vector<Bond> bonds;
  const int R = static_cast<int>(geo.orbitals.size());
  for (int a = 0; a < R; ++a) {
    for (int b = a; b < R; ++b) {
      for (int d1 = -kSearch; d1 <= kSearch; ++d1) {
        for (int d2 = -kSearch; d2 <= kSearch; ++d2) {
          // Each unordered bond once: a < b, or a == b with d lexicographically positive.
          if (a == b && !(d1 > 0 || (d1 == 0 && d2 > 0))) continue;
          const Vec2 v = sub(geo.position(d1, d2, b), geo.position(0, 0, a));
          if (std::abs(length(v) - target) < kDistTol) bonds.push_back({a, b, d1, d2, v});
        }
      }
    }
  }
  return bonds;
}

int chirality(Lattice lattice, const LatticeGeometry& geo, const Bond& bond) {
  if (lattice != Lattice::honeycomb) return 1;
  const auto nn = neighbour_bonds(geo, 1);
  const double bond_len = length(nn.front().vec);
  const Vec2 start = geo.position(0, 0, bond.from);
  const Vec2 end = geo.position(bond.d1, bond.d2, bond.to);
  const int R = static_cast<int>(geo.orbitals.size());
  for (int k = 0; k < R; ++k) {
    for (int c1 = -kSearch; c1 <= kSearch; ++c1) {
      for (int c2 = -kSearch; c2 <= kSearch; ++c2) {
        const Vec2 mid = geo.position(c1, c2, k);
        const Vec2 b1 = sub(mid, start);
        const Vec2 b2 = sub(end, mid);
        if (std::abs(length(b1) - bond_len) < kDistTol && std::abs(length(b2) - bond_len) < kDistTol) {
          return cross(b1, b2) > 0 ? 1 : -1;
        }
      }
    }
  }
  throw InputError("no two-step path for chirality");
}

TermSet translation_invariant_terms(const ModelSpec& spec) {
  spec.validate();
  const LatticeGeometry geo = lattice_geometry(spec.lattice);
  const SpinRep sp = spin_matrices(spec.s);
  const int r = sp.r();
  const Mat id = Mat::Identity(r, r);
  TermSet terms;
  terms.R = spec.R;
  terms.r = r;

  const auto nn = neighbour_bonds(geo, 1);
  const auto nnn = neighbour_bonds(geo, 2);

  auto add_hop = [&](const Bond& b, const Mat& amp) {
    if (amp.cwiseAbs().maxCoeff() == 0.0) return;
    // Merge onto an existing hop with the same endpoints.
    for (auto& h : terms.hops) {
      if (h.from == b.from && h.to == b.to && h.d1 == b.d1 && h.d2 == b.d2) {
        h.amp += amp;
        return;
      }
    }
    terms.hops.push_back({b.from, b.to, b.d1, b.d2, amp});
  };

  auto rashba = [&](const Vec2& v) -> Mat {
    const double len = length(v);
    const double dx = v[0] / len;
    const double dy = v[1] / len;
    // i (2 s x dhat)_z = 2i (s^x dy - s^y dx)
    return 2.0 * kI * (sp.sx * dy - sp.sy * dx);
  };

  for (const auto& b : nn) {
    Mat amp = spec.t_hop * id;
    if (spec.rashba_form == RashbaForm::nearest) amp += spec.lambda_Ra * rashba(b.vec);
    add_hop(b, amp);
  }
  for (const auto& b : nnn) {
    const int nu = chirality(spec.lattice, geo, b);
    Mat amp = spec.lambda_SO * kI * static_cast<double>(nu) * (2.0 * sp.sz);
    if (spec.rashba_form == RashbaForm::next_nearest) amp += spec.lambda_Ra * rashba(b.vec);
    add_hop(b, amp);
  }

  const Mat zeeman = spec.zeeman_axis[0] * sp.sx + spec.zeeman_axis[1] * sp.sy + spec.zeeman_axis[2] * sp.sz;
  for (int orb = 0; orb < spec.R; ++orb) {
    Mat amp = spec.lambda_Ze * zeeman;
    if (spec.lattice == Lattice::honeycomb) amp += spec.lambda_v * (orb == 0 ? 1.0 : -1.0) * id;
    if (amp.cwiseAbs().maxCoeff() != 0.0) terms.onsite.push_back({orb, amp});
  }
  return terms;
}

TermSet spin_block_terms(const TermSet& terms, int spin_index) {
  TermSet out;
  out.R = terms.R;
  out.r = 1;
  auto off_block = [&](const Mat& m) {
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        if (i != j && std::abs(m(i, j)) > 0.0) return true;
      }
    }
    return false;
  };
  for (const auto& h : terms.hops) {
    if (off_block(h.amp)) throw InputError("hopping term mixes spin levels");
    const cplx a = h.amp(spin_index, spin_index);
    if (a != cplx(0.0)) out.hops.push_back({h.from, h.to, h.d1, h.d2, Mat::Constant(1, 1, a)});
  }
  for (const auto& o : terms.onsite) {
    if (off_block(o.amp)) throw InputError("on-site term mixes spin levels");
    const cplx a = o.amp(spin_index, spin_index);
    if (a != cplx(0.0)) out.onsite.push_back({o.orb, Mat::Constant(1, 1, a)});
  }
  return out;
}

}  // namespace qsh
