#pragma once

#include <cstdint>
#include <vector>

namespace qsh {

/// Counter-based generator "qsh-splitmix64-ctr v1": the k-th draw for a seed
/// is splitmix64_finalize(seed + (k + 1) * 0x9E3779B97F4A7C15) mapped to
/// [-1, 1) through the top 53 bits. Pure integer arithmetic, so a draw depends
/// only on (seed, k) on every platform.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

/// Real on-site potential V(n1, n2, orb) in [-1, 1), identical for every spin
/// level. The draw for site (n1, n2, orb) uses counter (n2 * N1 + n1) * R + orb.
class DisorderField {
 public:
  DisorderField() = default;
  DisorderField(int n1, int n2, int R, std::vector<double> values);

  static DisorderField draw(std::uint64_t seed, int n1, int n2, int R);
  static DisorderField zero(int n1, int n2, int R);

  double operator()(int n1, int n2, int orb) const;
  /// Field translated by a on the torus: V'(n) = V(n - a).
  DisorderField translated(int a1, int a2) const;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int R() const { return R_; }
  bool empty() const { return values_.empty(); }

 private:
  int n1_ = 0;
  int n2_ = 0;
  int R_ = 0;
  std::vector<double> values_;
};

}  // namespace qsh
