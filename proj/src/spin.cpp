#include "qsh/spin.hpp"

#include <cmath>
#include <string>

#include "qsh/error.hpp"

namespace qsh {

Spin Spin::from_double(double s) {
  const double twice = 2.0 * s;
  const long rounded = std::lround(twice);
  if (std::abs(twice - static_cast<double>(rounded)) > 1e-12 || rounded < 1 || rounded % 2 == 0) {
    throw InputError("spin must be a positive half-odd-integer, got " + std::to_string(s));
  }
  return Spin{static_cast<int>(rounded)};
}

int Spin::index_of(double m) const {
  const double idx = value() - m;
  const long i = std::lround(idx);
  if (std::abs(idx - static_cast<double>(i)) > 1e-9 || i < 0 || i >= dim()) {
    throw InputError("no spin level " + std::to_string(m) + " for s=" + std::to_string(value()));
  }
  return static_cast<int>(i);
}

SpinRep spin_matrices(Spin s) {
  if (s.two_s < 1 || s.two_s % 2 == 0) {
    throw InputError("spin must be half-odd-integer (2s odd), got 2s=" + std::to_string(s.two_s));
  }
  const int r = s.dim();
  const double sv = s.value();
  SpinRep rep{s, Mat::Zero(r, r), Mat::Zero(r, r), Mat::Zero(r, r)};
  Mat splus = Mat::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    const double m = s.level(i);
    rep.sz(i, i) = m;
    // s^+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> has index i-1.
    if (i > 0) splus(i - 1, i) = std::sqrt(sv * (sv + 1.0) - m * (m + 1.0));
  }
  const Mat sminus = splus.adjoint();
  rep.sx = 0.5 * (splus + sminus);
  rep.sy = -0.5 * kI * (splus - sminus);
  return rep;
}

}  // namespace qsh
