#pragma once

#include <array>

#include "drmime/mat3.hpp"
#include "drmime/tape.hpp"

namespace drmime {

// Basis of the affine Lie algebra aff(2): x-shift, y-shift, rotation,
// isotropic scale, stretch (x up / y down), and shear-like symmetric mix.
// Every generator has a zero bottom row, so exp(sum c_i B_i) always has
// bottom row exactly (0,0,1).
const std::array<Mat3, 6>& generators();

using Coeffs6 = std::array<double, 6>;

struct LieParams {
    Coeffs6 v{};  // shared across all pyramid levels
    Coeffs6 v1{}; // finest-level correction
};

// Truncated exponential: sum_{n=0..10} B^n/n! with B = sum c_i B_i,
// accumulated Horner-style (S <- I + B*S/n for n = 10..1).
Mat3 mexp(const Coeffs6& coeffs);

// Tape variant of the same series; coeffs is a rank-1 {6} (or {6,1})
// variable. Bottom row is (0,0,1) by construction here too.
ad::Var mexp(ad::Tape& tape, ad::Var coeffs);

// Reference exponential: scaling-and-squaring with a 30-term series on
// B/2^k where k makes the 1-norm of B/2^k at most 0.5.
Mat3 mexp_oracle(const Coeffs6& coeffs);

// Level 1 uses mexp(v + v1); every coarser level uses mexp(v).
Mat3 compose_params(const LieParams& p, std::size_t level);

// Transform a batch of normalized homogeneous points: pts_h {n,3} with
// third column = 1; returns {n,2}.
ad::Var apply(ad::Tape& tape, ad::Var H, ad::Var pts_h);

// 1-norm (max column abs sum) of B = sum c_i B_i; used by tests and the
// oracle's scaling step.
double basis_combination_norm1(const Coeffs6& coeffs);

} // namespace drmime
