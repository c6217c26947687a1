#pragma once

#include "qsh/hamiltonian.hpp"

namespace qsh {

/// Interpolation between H and its s^z-conserving part.
///
/// H0 keeps only the blocks of H between equal s^z levels (the pinching
/// sum_l Q_l H Q_l over the eigenprojections Q_l of sz_full) and H1 = H - H0,
/// so H(lambda) = H0 + lambda H1 with H(1) = H and [H(0), s^z] = 0. For s = 1/2
/// this is H + ((1 - lambda)/2) [sigma^z, H] sigma^z with sigma^z = 2 s^z.
struct Homotopy {
  Mat h_lambda;
  Mat h0;
  Mat h1;
};

/// sz_full must be diagonal (the model basis); any other input is rejected.
Homotopy apply_homotopy(const Mat& h, const Mat& sz_full, double lambda);
HamiltonianMatrix apply_homotopy(const HamiltonianMatrix& h, Spin s, double lambda);

/// Operator 2-norm of [H, sz_full].
double commutator_norm(const Mat& h, const Mat& sz_full);

/// Upper bound on ||H1|| in terms of ||[H, s^z]||: the part of [H, s^z]
/// between levels m apart is bounded by the commutator norm and equals m
/// times the corresponding part of H1, hence ||H1|| <= 2 (1 + 1/2 + ... + 1/2s) ||[H, s^z]||.
double h1_bound_factor(Spin s);

}  // namespace qsh
