#pragma once

#include <random>

#include "qsh/hamiltonian.hpp"
#include "qsh/linalg.hpp"
#include "qsh/model_spec.hpp"

namespace qsh::fixtures {

inline ModelSpec km(double lambda_so = 0.2) { return ModelSpec::kane_mele(lambda_so); }

inline Mat random_hermitian(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {d(rng), d(rng)};
  return 0.5 * (a + a.adjoint());
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

/// Sorted union of eigenvalues of the Bloch fibers on the N x N grid.
inline std::vector<double> bloch_union(const ModelSpec& spec, int N) {
  std::vector<double> out;
  const double pi = 3.141592653589793;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const auto h = build_hamiltonian(spec, BlochFiber{2 * pi * i / N, 2 * pi * j / N});
      const RVec e = eigvalsh(h.h);
      out.insert(out.end(), e.data(), e.data() + e.size());
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qsh::fixtures
