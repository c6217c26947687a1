#include "qsh/disorder.hpp"

#include "qsh/error.hpp"

namespace qsh {

namespace {

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t z = splitmix64_finalize(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

DisorderField::DisorderField(int n1, int n2, int R, std::vector<double> values)
    : n1_(n1), n2_(n2), R_(R), values_(std::move(values)) {
  if (static_cast<std::size_t>(n1) * n2 * R != values_.size()) {
    throw InputError("disorder field size mismatch");
  }
}

DisorderField DisorderField::draw(std::uint64_t seed, int n1, int n2, int R) {
  std::vector<double> v(static_cast<std::size_t>(n1) * n2 * R);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = counter_uniform(seed, k);
  return DisorderField(n1, n2, R, std::move(v));
}

DisorderField DisorderField::zero(int n1, int n2, int R) {
  return DisorderField(n1, n2, R, std::vector<double>(static_cast<std::size_t>(n1) * n2 * R, 0.0));
}

double DisorderField::operator()(int n1, int n2, int orb) const {
  return values_[(static_cast<std::size_t>(n2) * n1_ + n1) * R_ + orb];
}

DisorderField DisorderField::translated(int a1, int a2) const {
  std::vector<double> v(values_.size());
  for (int j = 0; j < n2_; ++j) {
    for (int i = 0; i < n1_; ++i) {
      for (int o = 0; o < R_; ++o) {
        v[(static_cast<std::size_t>(j) * n1_ + i) * R_ + o] = (*this)(wrap(i - a1, n1_), wrap(j - a2, n2_), o);
      }
    }
  }
  return DisorderField(n1_, n2_, R_, std::move(v));
}

}  // namespace qsh
