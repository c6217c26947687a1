#pragma once

#include <array>
#include <vector>

#include "qsh/model_spec.hpp"

namespace qsh {

using Vec2 = std::array<double, 2>;

/// Real-space embedding of a lattice: Bravais vectors a1, a2 and orbital
/// offsets inside the cell. Cell n = (n1, n2) sits at n1*a1 + n2*a2.
struct LatticeGeometry {
  Vec2 a1, a2;
  std::vector<Vec2> orbitals;

  Vec2 position(int n1, int n2, int orb) const;
};

LatticeGeometry lattice_geometry(Lattice lattice);

/// Directed hopping <n+d, to| H |n, from> = amp (r x r spin block). The
/// Hermitian conjugate is implied and added by every assembler.
struct Hop {
  int from = 0;
  int to = 0;
  int d1 = 0;
  int d2 = 0;
  Mat amp;
};

/// Hermitian on-site spin block for one orbital.
struct Onsite {
  int orb = 0;
  Mat amp;
};

/// Translation-invariant part of a model (everything except disorder and
/// magnetic phases).
struct TermSet {
  int R = 1;
  int r = 2;
  std::vector<Hop> hops;
  std::vector<Onsite> onsite;

  int L() const { return R * r; }
  /// Largest |d1| and |d2| over all hops.
  int range1() const;
  int range2() const;
};

/// Unordered bond between (from, cell 0) and (to, cell d), listed once.
struct Bond {
  int from = 0;
  int to = 0;
  int d1 = 0;
  int d2 = 0;
  Vec2 vec{};  // real-space vector from -> to
};

/// Nearest (shell 1) and next-nearest (shell 2) neighbour bonds.
std::vector<Bond> neighbour_bonds(const LatticeGeometry& geo, int shell);

/// Chirality sign nu = +-1 attached to a next-nearest bond. On the honeycomb
/// lattice this is the sign of (b1 x b2)_z along the unique two-step
/// nearest-neighbour path from -> to; elsewhere the listed orientation
/// carries nu = +1.
int chirality(Lattice lattice, const LatticeGeometry& geo, const Bond& bond);

/// Translation-invariant terms of the model:
///   t_hop     * nearest-neighbour adjacency (spin identity)
///   lambda_SO * i nu (2 s^z) on next-nearest bonds
///   lambda_Ra * i (2 s x dhat)_z on nearest (or next-nearest) bonds
///   lambda_Ze * (b . s) on site
///   lambda_v  * (+1 on A, -1 on B) on site
TermSet translation_invariant_terms(const ModelSpec& spec);

/// Keep only the (level, level) spin component of every term; yields an
/// R-orbital, spinless term set. Requires an s^z-conserving spec.
TermSet spin_block_terms(const TermSet& terms, int spin_index);

}  // namespace qsh
