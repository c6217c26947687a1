#include "qsh/jacobi.hpp"

#include <array>
#include <cmath>
#include <map>

#include "qsh/error.hpp"

namespace qsh {

namespace {

int floor_div(int a, int b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }

int wrap(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

Mat JacobiForm::A(double k) const {
  return T2 + std::exp(kI * k) * T3 + std::exp(-kI * k) * T4;
}

Mat JacobiForm::D(double k) const {
  return std::exp(kI * k) * T1.adjoint() + std::exp(-kI * k) * T1 + W;
}

JacobiForm to_jacobi_form(const TermSet& spinless) {
  if (spinless.r != 1) throw InputError("to_jacobi_form expects a spinless term set");
  JacobiForm jf;
  jf.R_orig = spinless.R;
  jf.m1 = std::max(1, spinless.range1());
  jf.m2 = std::max(1, spinless.range2());
  const int R = spinless.R;
  const int Rp = R * jf.m1 * jf.m2;

  // h[D] is the amplitude block for enlarged-cell displacement D in {-1,0,1}^2.
  std::map<std::pair<int, int>, Mat> h;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) h[{a, b}] = Mat::Zero(Rp, Rp);
  }
  auto orb = [&](int c1, int c2, int o) { return (c2 * jf.m1 + c1) * R + o; };

  for (int c2 = 0; c2 < jf.m2; ++c2) {
    for (int c1 = 0; c1 < jf.m1; ++c1) {
      for (const auto& hop : spinless.hops) {
        const int t1 = c1 + hop.d1;
        const int t2 = c2 + hop.d2;
        const int D1 = floor_div(t1, jf.m1);
        const int D2 = floor_div(t2, jf.m2);
        const int to = orb(t1 - D1 * jf.m1, t2 - D2 * jf.m2, hop.to);
        const int from = orb(c1, c2, hop.from);
        const cplx a = hop.amp(0, 0);
        h.at({D1, D2})(to, from) += a;
        h.at({-D1, -D2})(from, to) += std::conj(a);
      }
      for (const auto& o : spinless.onsite) {
        const int i = orb(c1, c2, o.orb);
        h.at({0, 0})(i, i) += o.amp(0, 0);
      }
    }
  }
  jf.W = h.at({0, 0});
  jf.T1 = h.at({-1, 0});
  jf.T2 = h.at({0, -1});
  jf.T3 = h.at({1, -1});
  jf.T4 = h.at({-1, -1});
  return jf;
}

JacobiForm to_jacobi_form(const ModelSpec& spec, double level) {
  if (spec.lambda_Ra != 0.0) {
    throw InputError("to_jacobi_form: lambda_Ra = " + std::to_string(spec.lambda_Ra) + " breaks s^z conservation");
  }
  if (spec.lambda_Ze != 0.0) {
    throw InputError("to_jacobi_form: lambda_Ze = " + std::to_string(spec.lambda_Ze) + " breaks s^z conservation");
  }
  if (spec.lambda_dis != 0.0) throw InputError("to_jacobi_form: lambda_dis must be 0 (periodic operator)");
  if (!spec.flux_B.zero()) throw InputError("to_jacobi_form: flux_B must be 0");
  const TermSet terms = translation_invariant_terms(spec);
  return to_jacobi_form(spin_block_terms(terms, spec.s.index_of(level)));
}

Mat assemble_jacobi_torus(const JacobiForm& jf, int N1, int N2) {
  if (N1 < 1 || N2 < 1) throw InputError("torus dimensions must be positive");
  const int Rp = jf.R();
  const Eigen::Index dim = static_cast<Eigen::Index>(N1) * N2 * Rp;
  Mat H = Mat::Zero(dim, dim);
  auto cell = [&](int n1, int n2) { return (static_cast<Eigen::Index>(wrap(n2, N2)) * N1 + wrap(n1, N1)) * Rp; };
  // <n| T S^*_j |n + e_j> style placement: block (n, n + shift) gets T, block (n + shift, n) gets T^*.
  const std::array<std::pair<const Mat*, std::pair<int, int>>, 4> terms = {{
      {&jf.T1, {1, 0}},   // T1 S1^*:  psi_{n+e1}
      {&jf.T2, {0, 1}},   // T2 S2^*:  psi_{n+e2}
      {&jf.T3, {-1, 1}},  // T3 S3^*:  psi_{n-e1+e2}
      {&jf.T4, {1, 1}},   // T4 S4^*:  psi_{n+e1+e2}
  }};
  for (int n2 = 0; n2 < N2; ++n2) {
    for (int n1 = 0; n1 < N1; ++n1) {
      const Eigen::Index i = cell(n1, n2);
      H.block(i, i, Rp, Rp) += jf.W;
      for (const auto& [T, s] : terms) {
        const Eigen::Index j = cell(n1 + s.first, n2 + s.second);
        H.block(i, j, Rp, Rp) += *T;
        H.block(j, i, Rp, Rp) += T->adjoint();
      }
    }
  }
  return H;
}

std::vector<Eigen::Index> enlarged_order(const JacobiForm& jf, int N1, int N2) {
  const int R = jf.R_orig;
  const int big1 = N1 * jf.m1;
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(N1) * N2 * jf.R());
  for (int n2 = 0; n2 < N2; ++n2) {
    for (int n1 = 0; n1 < N1; ++n1) {
      for (int c2 = 0; c2 < jf.m2; ++c2) {
        for (int c1 = 0; c1 < jf.m1; ++c1) {
          for (int o = 0; o < R; ++o) {
            const int o1 = n1 * jf.m1 + c1;
            const int o2 = n2 * jf.m2 + c2;
            order.push_back((static_cast<Eigen::Index>(o2) * big1 + o1) * R + o);
          }
        }
      }
    }
  }
  return order;
}

}  // namespace qsh
