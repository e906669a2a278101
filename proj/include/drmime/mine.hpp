#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "drmime/rng.hpp"
#include "drmime/tape.hpp"

namespace drmime {

// Critic MLP: d_in -> 100 -> 100 -> 1, ReLU after both hidden layers.
// d_in = c_fixed + c_moving, so 2/4/6 for gray-gray / gray-rgb / rgb-rgb.
struct MineNetwork {
    std::size_t c_fixed = 1;
    std::size_t c_moving = 1;
    ad::Tensor w1, b1, w2, b2, w3, b3; // w1 {100,d_in}, w2 {100,100}, w3 {1,100}

    std::size_t d_in() const { return c_fixed + c_moving; }

    // Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases. Draw order:
    // w1 row-major, then w2, then w3.
    static MineNetwork init(std::size_t c_fixed, std::size_t c_moving, Rng& rng);
};

// The network staged onto a tape (weights as inputs, trainable or frozen).
struct MineVars {
    std::size_t c_fixed = 0, c_moving = 0;
    ad::Var w1, b1, w2, b2, w3, b3;
};

MineVars stage(ad::Tape& tape, const MineNetwork& net, bool trainable);

// Parameter handles in update order (w1, b1, w2, b2, w3, b3).
std::array<ad::Var, 6> param_vars(const MineVars& vars);
std::array<ad::Tensor*, 6> param_tensors(MineNetwork& net);

// pairs {N, d_in}, columns = fixed channels then moving channels -> {N,1}.
ad::Var mlp_forward(ad::Tape& tape, const MineVars& vars, ad::Var pairs);

// Same network applied to a pair given as separate column blocks. The
// first layer is computed as p*W1p' + q*W1q', never as one fused product,
// so swapping the blocks together with the matching weight columns gives
// bit-identical outputs.
ad::Var mlp_forward_split(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q);

// log(mean(exp(x))) of a column {N,1}, with the max subtracted before
// exponentiation (mandatory: f is unbounded).
ad::Var logmeanexp(ad::Tape& tape, ad::Var col);

// Donsker-Varadhan bound: mean_i f(P_i,Q_i) - logmeanexp_i f(P_i,Q_s(i))
// for one fresh uniform permutation s.
ad::Var dv_bound(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q, Rng& rng);
ad::Var dv_bound_with_perm(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q,
                           const std::vector<std::size_t>& perm);

// Trains a fresh network on synthetic correlated Gaussians and compares
// the final bound against the closed form -0.5*ln(1-rho^2).
struct SelftestResult {
    double rho = 0.0;
    double closed_form = 0.0;
    double estimate = 0.0;       // mean of full-data bounds over fresh permutations
    double stderr_estimate = 0.0;
    std::size_t n = 0;
    std::size_t steps = 0;
    bool pass = false; // estimate within [closed_form - 0.10, closed_form + 0.05]
};
SelftestResult mine_selftest(double rho, std::size_t n, std::size_t steps, std::uint64_t seed);

} // namespace drmime
