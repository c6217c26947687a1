#pragma once

#include "qsh/linalg.hpp"

namespace qsh {

/// Half-integer spin stored as twice its value, so s = two_s / 2.
struct Spin {
  int two_s = 1;

  double value() const { return 0.5 * two_s; }
  int dim() const { return two_s + 1; }
  /// Eigenvalue of s^z for basis index i (i = 0 is m = +s).
  double level(int i) const { return value() - i; }
  /// Basis index of the level m.
  int index_of(double m) const;

  static Spin from_double(double s);
  friend bool operator==(Spin a, Spin b) { return a.two_s == b.two_s; }
};

/// Irreducible spin representation in the basis |s,m>, m = s, s-1, ..., -s.
/// sx and sz are real, sy purely imaginary.
struct SpinRep {
  Spin s;
  Mat sx, sy, sz;

  int r() const { return s.dim(); }
};

SpinRep spin_matrices(Spin s);

}  // namespace qsh
