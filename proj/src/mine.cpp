#include "drmime/mine.hpp"

#include <cmath>

#include "drmime/errors.hpp"
#include "drmime/optimizer.hpp"

namespace drmime {

namespace {

constexpr std::size_t kHidden = 100;

void check_channels(std::size_t c) {
    if (c != 1 && c != 3) throw InvalidArgument("MineNetwork: channel counts must be 1 or 3");
}

ad::Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    ad::Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
    return t;
}

} // namespace

MineNetwork MineNetwork::init(std::size_t c_fixed, std::size_t c_moving, Rng& rng) {
    check_channels(c_fixed);
    check_channels(c_moving);
    MineNetwork net;
    net.c_fixed = c_fixed;
    net.c_moving = c_moving;
    const std::size_t d = net.d_in();
    // fan_in = columns (inputs), fan_out = rows (units)
    net.w1 = glorot(kHidden, d, rng);
    net.b1 = ad::Tensor({kHidden});
    net.w2 = glorot(kHidden, kHidden, rng);
    net.b2 = ad::Tensor({kHidden});
    net.w3 = glorot(1, kHidden, rng);
    net.b3 = ad::Tensor({1});
    return net;
}

MineVars stage(ad::Tape& tape, const MineNetwork& net, bool trainable) {
    MineVars v;
    v.c_fixed = net.c_fixed;
    v.c_moving = net.c_moving;
    v.w1 = tape.input(net.w1, trainable);
    v.b1 = tape.input(net.b1, trainable);
    v.w2 = tape.input(net.w2, trainable);
    v.b2 = tape.input(net.b2, trainable);
    v.w3 = tape.input(net.w3, trainable);
    v.b3 = tape.input(net.b3, trainable);
    return v;
}

std::array<ad::Var, 6> param_vars(const MineVars& vars) {
    return {vars.w1, vars.b1, vars.w2, vars.b2, vars.w3, vars.b3};
}

std::array<ad::Tensor*, 6> param_tensors(MineNetwork& net) {
    return {&net.w1, &net.b1, &net.w2, &net.b2, &net.w3, &net.b3};
}

ad::Var mlp_forward_split(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q) {
    const std::size_t cf = vars.c_fixed, cm = vars.c_moving;
    const ad::Tensor& pv = tape.value(p);
    const ad::Tensor& qv = tape.value(q);
    if (pv.rank() != 2 || pv.cols() != cf || qv.rank() != 2 || qv.cols() != cm ||
        pv.rows() != qv.rows())
        throw InvalidArgument("mlp_forward_split: need {N,c_fixed} and {N,c_moving}");

    ad::Var w1p = ad::slice_cols(vars.w1, 0, cf);
    ad::Var w1q = ad::slice_cols(vars.w1, cf, cf + cm);
    ad::Var pre1 = ad::add(ad::matmul(p, ad::transpose(w1p)), ad::matmul(q, ad::transpose(w1q)));
    ad::Var h1 = ad::relu(ad::add_rowvec(pre1, vars.b1));
    ad::Var h2 = ad::relu(ad::add_rowvec(ad::matmul(h1, ad::transpose(vars.w2)), vars.b2));
    return ad::add_rowvec(ad::matmul(h2, ad::transpose(vars.w3)), vars.b3);
}

ad::Var mlp_forward(ad::Tape& tape, const MineVars& vars, ad::Var pairs) {
    const ad::Tensor& x = tape.value(pairs);
    const std::size_t d = vars.c_fixed + vars.c_moving;
    if (x.rank() != 2 || x.cols() != d)
        throw InvalidArgument("mlp_forward: pair width does not match network d_in");
    ad::Var p = ad::slice_cols(pairs, 0, vars.c_fixed);
    ad::Var q = ad::slice_cols(pairs, vars.c_fixed, d);
    return mlp_forward_split(tape, vars, p, q);
}

ad::Var logmeanexp(ad::Tape& tape, ad::Var col) {
    const ad::Tensor& x = tape.value(col);
    if (x.rank() != 2 || x.cols() != 1) throw InvalidArgument("logmeanexp: need {N,1}");
    const std::size_t n = x.rows();
    ad::Var m = ad::max_reduce(col);
    // broadcast the scalar max down the column
    ad::Var ones = tape.constant(ad::Tensor::full({n, 1}, 1.0));
    ad::Var shifted = ad::sub(col, ad::matmul(ones, ad::reshape(m, {1, 1})));
    return ad::add(ad::log(ad::mean(ad::exp(shifted))), m);
}

ad::Var dv_bound_with_perm(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q,
                           const std::vector<std::size_t>& perm) {
    const std::size_t n = tape.value(p).rows();
    if (n < 2) throw InvalidArgument("dv_bound: need at least 2 samples");
    if (perm.size() != n) throw InvalidArgument("dv_bound: permutation size mismatch");
    ad::Var f_joint = mlp_forward_split(tape, vars, p, q);
    ad::Var q_shuffled = ad::gather_rows(q, perm);
    ad::Var f_marginal = mlp_forward_split(tape, vars, p, q_shuffled);
    return ad::sub(ad::mean(f_joint), logmeanexp(tape, f_marginal));
}

ad::Var dv_bound(ad::Tape& tape, const MineVars& vars, ad::Var p, ad::Var q, Rng& rng) {
    const std::size_t n = tape.value(p).rows();
    if (n < 2) throw InvalidArgument("dv_bound: need at least 2 samples");
    return dv_bound_with_perm(tape, vars, p, q, rng.permutation(n));
}

SelftestResult mine_selftest(double rho, std::size_t n, std::size_t steps, std::uint64_t seed) {
    if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("mine_selftest: need |rho| < 1");
    if (n < 16) throw InvalidArgument("mine_selftest: need n >= 16");
    if (steps < 1) throw InvalidArgument("mine_selftest: need steps >= 1");

    Rng rng(seed);

    // x ~ N(0,1), y = rho*x + sqrt(1-rho^2)*z
    ad::Tensor xs({n, 1}), ys({n, 1});
    const double mix = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        xs[i] = z1;
        ys[i] = rho * z1 + mix * z2;
    }

    MineNetwork net = MineNetwork::init(1, 1, rng);

    // Full-batch steps at n=10000 are needlessly slow; minibatches train
    // the critic just as well. The final estimate always uses all n rows.
    const std::size_t batch = std::min<std::size_t>(1000, n);
    AdamAms opt;
    for (std::size_t s = 0; s < steps; ++s) {
        const std::vector<std::size_t> idx = rng.sample_without_replacement(n, batch);
        ad::Tensor pb({batch, 1}), qb({batch, 1});
        for (std::size_t i = 0; i < batch; ++i) {
            pb[i] = xs[idx[i]];
            qb[i] = ys[idx[i]];
        }
        ad::Tape tape;
        MineVars vars = stage(tape, net, true);
        ad::Var j = dv_bound(tape, vars, tape.constant(std::move(pb)), tape.constant(std::move(qb)),
                             rng);
        tape.backward(j);

        const auto pv = param_vars(vars);
        std::vector<const ad::Tensor*> grads;
        std::vector<ad::Tensor*> params;
        auto pt = param_tensors(net);
        for (std::size_t i = 0; i < 6; ++i) {
            grads.push_back(&tape.grad(pv[i]));
            params.push_back(pt[i]);
        }
        opt.step(params, grads, 1e-3);
    }

    // Estimate = mean full-data bound over fresh permutations; the spread
    // across permutations gives the standard error.
    constexpr std::size_t kReps = 10;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r = 0; r < kReps; ++r) {
        ad::Tape tape;
        MineVars vars = stage(tape, net, false);
        ad::Var j = dv_bound(tape, vars, tape.constant(xs), tape.constant(ys), rng);
        const double v = tape.value(j)[0];
        sum += v;
        sumsq += v * v;
    }
    SelftestResult res;
    res.rho = rho;
    res.closed_form = -0.5 * std::log(1.0 - rho * rho);
    res.estimate = sum / kReps;
    const double var = std::max(0.0, sumsq / kReps - res.estimate * res.estimate);

    // Permutation spread alone understates the error of the estimate: the n
    // sample pairs are fixed across reps, so fold in the delta-method error
    // of mean(f) - log mean exp(f) over the draw of the data itself.
    double se_data_sq = 0.0;
    {
        ad::Tape tape;
        MineVars vars = stage(tape, net, false);
        ad::Var p = tape.constant(xs);
        ad::Var fj = mlp_forward_split(tape, vars, p, tape.constant(ys));
        const std::vector<std::size_t> s = rng.permutation(n);
        ad::Tensor ysh({n, 1});
        for (std::size_t i = 0; i < n; ++i) ysh[i] = ys[s[i]];
        ad::Var fm = mlp_forward_split(tape, vars, p, tape.constant(std::move(ysh)));
        const ad::Tensor& vj = tape.value(fj);
        const ad::Tensor& vm = tape.value(fm);
        double mmax = vm[0];
        for (std::size_t i = 1; i < n; ++i) mmax = std::max(mmax, vm[i]);
        double mj = 0.0, mjsq = 0.0, mg = 0.0, mgsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = std::exp(vm[i] - mmax);
            mj += vj[i];
            mjsq += vj[i] * vj[i];
            mg += g;
            mgsq += g * g;
        }
        mj /= n;
        mjsq /= n;
        mg /= n;
        mgsq /= n;
        const double varj = std::max(0.0, mjsq - mj * mj);
        const double varg = std::max(0.0, mgsq - mg * mg);
        se_data_sq = varj / n + varg / (n * mg * mg);
    }
    res.stderr_estimate = std::sqrt(var / kReps + se_data_sq);
    res.n = n;
    res.steps = steps;
    res.pass = res.estimate >= res.closed_form - 0.10 && res.estimate <= res.closed_form + 0.05;
    return res;
}

} // namespace drmime
