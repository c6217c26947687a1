#include "qsh/hamiltonian.hpp"

#include <cmath>
#include <numbers>

#include "qsh/error.hpp"

namespace qsh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int wrap(int i, int n) { return ((i % n) + n) % n; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_geometry(const Geometry& g, Flux flux) {
  std::visit(overloaded{
                 [&](const Torus& t) {
                   if (t.N1 < 1 || t.N2 < 1) throw InputError("torus dimensions must be positive");
                   if (!flux.zero() && (t.N1 % flux.q != 0 || t.N2 % flux.q != 0)) {
                     throw InputError("flux " + flux.str() + " incompatible with torus " +
                                      std::to_string(t.N1) + "x" + std::to_string(t.N2) +
                                      ": q must divide both sides");
                   }
                 },
                 [&](const BlochFiber&) {
                   if (!flux.zero()) throw InputError("Bloch fibers need flux_B = 0 (use a magnetic supercell)");
                 },
                 [&](const RibbonFiber& rb) {
                   if (rb.N2 < 1) throw InputError("ribbon width must be positive");
                 },
                 [&](const OpenBox& o) {
                   if (o.N1 < 1 || o.N2 < 1) throw InputError("open box dimensions must be positive");
                 },
                 [&](const Ring& rg) {
                   if (rg.N1 < 1 || rg.N2 < 1) throw InputError("ring dimensions must be positive");
                 },
             },
             g);
}

struct Target {
  bool valid = false;
  int m1 = 0;
  int m2 = 0;
  cplx phase{1.0, 0.0};
};

// Where a hop from cell (n1, n2) along d lands, and the Bloch/twist phase it picks up.
Target locate(const Geometry& g, int n1, int n2, int d1, int d2) {
  return std::visit(
      overloaded{
          [&](const Torus& t) { return Target{true, wrap(n1 + d1, t.N1), wrap(n2 + d2, t.N2)}; },
          [&](const BlochFiber& b) {
            return Target{true, 0, 0, std::exp(-kI * (b.k1 * d1 + b.k2 * d2))};
          },
          [&](const RibbonFiber& rb) {
            const int m2 = n2 + d2;
            if (m2 < 0 || m2 >= rb.N2) return Target{};
            return Target{true, 0, m2, std::exp(-kI * (rb.k * d1))};
          },
          [&](const OpenBox& o) {
            const int m1 = n1 + d1;
            const int m2 = n2 + d2;
            if (m1 < 0 || m1 >= o.N1 || m2 < 0 || m2 >= o.N2) return Target{};
            return Target{true, m1, m2};
          },
          [&](const Ring& rg) {
            const int m2 = n2 + d2;
            if (m2 < 0 || m2 >= rg.N2) return Target{};
            return Target{true, wrap(n1 + d1, rg.N1), m2,
                          std::exp(-kI * (rg.theta * d1 / static_cast<double>(rg.N1)))};
          },
      },
      g);
}

// Landau-gauge Peierls factor for the hop n -> n + d.
cplx peierls(Flux flux, int n2, int d1, int d2) {
  if (flux.zero() || d1 == 0) return {1.0, 0.0};
  return std::exp(-kI * (kTwoPi * flux.value() * (n2 + 0.5 * d2) * d1));
}

enum class Mode { hamiltonian, velocity };

HamiltonianMatrix assemble(const TermSet& terms, const Geometry& g, Flux flux, Mode mode,
                           const DisorderField* disorder, double lambda_dis) {
  check_geometry(g, flux);
  const auto [C1, C2] = cell_counts(g);
  HamiltonianMatrix out;
  out.geometry = g;
  out.R = terms.R;
  out.r = terms.r;
  out.C1 = C1;
  out.C2 = C2;
  const Eigen::Index dim = static_cast<Eigen::Index>(C1) * C2 * terms.L();
  out.h = Mat::Zero(dim, dim);
  const int r = terms.r;

  for (int n2 = 0; n2 < C2; ++n2) {
    for (int n1 = 0; n1 < C1; ++n1) {
      for (const auto& hop : terms.hops) {
        const Target t = locate(g, n1, n2, hop.d1, hop.d2);
        if (!t.valid) continue;
        cplx factor = t.phase * peierls(flux, n2, hop.d1, hop.d2);
        // i[H, X1] has kernel -i d1 h_d.
        if (mode == Mode::velocity) factor *= -kI * static_cast<double>(hop.d1);
        if (factor == cplx(0.0)) continue;
        const Eigen::Index row = out.index(t.m1, t.m2, hop.to, 0);
        const Eigen::Index col = out.index(n1, n2, hop.from, 0);
        const Mat block = factor * hop.amp;
        out.h.block(row, col, r, r) += block;
        out.h.block(col, row, r, r) += block.adjoint();
      }
      if (mode == Mode::velocity) continue;
      for (const auto& o : terms.onsite) {
        const Eigen::Index i = out.index(n1, n2, o.orb, 0);
        out.h.block(i, i, r, r) += o.amp;
      }
      if (disorder != nullptr && lambda_dis != 0.0) {
        for (int orb = 0; orb < terms.R; ++orb) {
          const double v = lambda_dis * (*disorder)(n1, n2, orb);
          for (int s = 0; s < r; ++s) {
            const Eigen::Index i = out.index(n1, n2, orb, s);
            out.h(i, i) += v;
          }
        }
      }
    }
  }
  return out;
}

const DisorderField* resolve_disorder(const ModelSpec& spec, const Geometry& g, const BuildOptions& opt,
                                      DisorderField& storage) {
  if (spec.lambda_dis == 0.0) return nullptr;
  if (!supports_disorder(g)) {
    throw InputError("lambda_dis != 0 needs a finite geometry (torus, open box or ring), got " +
                     geometry_name(g));
  }
  const auto [C1, C2] = cell_counts(g);
  if (opt.disorder) {
    if (opt.disorder->n1() != C1 || opt.disorder->n2() != C2 || opt.disorder->R() != spec.R) {
      throw InputError("disorder field shape does not match geometry");
    }
    return &*opt.disorder;
  }
  storage = DisorderField::draw(spec.seed, C1, C2, spec.R);
  return &storage;
}

}  // namespace

std::string geometry_name(const Geometry& g) {
  return std::visit(overloaded{
                        [](const Torus& t) { return "torus(" + std::to_string(t.N1) + "," + std::to_string(t.N2) + ")"; },
                        [](const BlochFiber&) { return std::string("bloch-fiber"); },
                        [](const RibbonFiber& rb) { return "ribbon-fiber(" + std::to_string(rb.N2) + ")"; },
                        [](const OpenBox& o) { return "open(" + std::to_string(o.N1) + "," + std::to_string(o.N2) + ")"; },
                        [](const Ring& rg) { return "ring(" + std::to_string(rg.N1) + "," + std::to_string(rg.N2) + ")"; },
                    },
                    g);
}

std::pair<int, int> cell_counts(const Geometry& g) {
  return std::visit(overloaded{
                        [](const Torus& t) { return std::pair{t.N1, t.N2}; },
                        [](const BlochFiber&) { return std::pair{1, 1}; },
                        [](const RibbonFiber& rb) { return std::pair{1, rb.N2}; },
                        [](const OpenBox& o) { return std::pair{o.N1, o.N2}; },
                        [](const Ring& rg) { return std::pair{rg.N1, rg.N2}; },
                    },
                    g);
}

bool supports_disorder(const Geometry& g) {
  return std::holds_alternative<Torus>(g) || std::holds_alternative<OpenBox>(g) ||
         std::holds_alternative<Ring>(g);
}

RVec HamiltonianMatrix::sz_diagonal(Spin s) const {
  if (s.dim() != r) throw InputError("spin does not match the matrix fiber");
  RVec d(dim());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = s.level(static_cast<int>(i % r));
  return d;
}

Mat HamiltonianMatrix::sz_full(Spin s) const { return sz_diagonal(s).cast<cplx>().asDiagonal(); }

HamiltonianMatrix build_hamiltonian(const ModelSpec& spec, const Geometry& geometry, const BuildOptions& options) {
  const TermSet terms = translation_invariant_terms(spec);
  DisorderField storage;
  const DisorderField* dis = resolve_disorder(spec, geometry, options, storage);
  return assemble(terms, geometry, spec.flux_B, Mode::hamiltonian, dis, spec.lambda_dis);
}

HamiltonianMatrix assemble_terms(const TermSet& terms, const Geometry& geometry, Flux flux) {
  return assemble(terms, geometry, flux, Mode::hamiltonian, nullptr, 0.0);
}

HamiltonianMatrix build_velocity(const ModelSpec& spec, const Geometry& geometry, const BuildOptions& options) {
  if (std::holds_alternative<Torus>(geometry)) {
    throw InputError("velocity i[H, X1] is not defined on a torus; use a ring geometry");
  }
  (void)options;  // the potential is diagonal in position and drops out of i[H, X1]
  return velocity_terms(translation_invariant_terms(spec), geometry, spec.flux_B);
}

HamiltonianMatrix velocity_terms(const TermSet& terms, const Geometry& geometry, Flux flux) {
  return assemble(terms, geometry, flux, Mode::velocity, nullptr, 0.0);
}

Mat magnetic_translation(const HamiltonianMatrix& torus, Flux flux, int a1, int a2) {
  const auto* t = std::get_if<Torus>(&torus.geometry);
  if (t == nullptr) throw InputError("magnetic translations act on torus geometries");
  const Eigen::Index dim = torus.dim();
  Mat u = Mat::Zero(dim, dim);
  const int L = torus.R * torus.r;
  for (int n2 = 0; n2 < t->N2; ++n2) {
    for (int n1 = 0; n1 < t->N1; ++n1) {
      const cplx phase = std::exp(-kI * (kTwoPi * flux.value() * a2 * n1));
      const Eigen::Index row = torus.index(n1, n2, 0, 0);
      const Eigen::Index col = torus.index(wrap(n1 - a1, t->N1), wrap(n2 - a2, t->N2), 0, 0);
      for (int k = 0; k < L; ++k) u(row + k, col + k) = phase;
    }
  }
  return u;
}

}  // namespace qsh
