#include "drmime/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "drmime/coords.hpp"
#include "drmime/lie_affine.hpp"
#include "drmime/mine.hpp"
#include "drmime/rng.hpp"
#include "drmime/tape.hpp"

namespace drmime {

double gradcheck_rel_err(double analytic, double fd) {
    const double denom = std::max({std::fabs(analytic), std::fabs(fd), 1e-5});
    return std::fabs(analytic - fd) / denom;
}

namespace {

using Builder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Runs one check: analytic gradients from a single backward pass vs a
// central difference per input element, each probe on a fresh tape. The
// builder must be a pure function of the inputs (anything random in it
// has to be frozen before the check starts).
GradCheckReport check(const std::string& name, const std::vector<ad::Tensor>& inputs,
                      const Builder& build, double tol, double h) {
    const auto eval = [&](const std::vector<ad::Tensor>& ins) {
        ad::Tape t;
        std::vector<ad::Var> vars;
        vars.reserve(ins.size());
        for (const ad::Tensor& in : ins) vars.push_back(t.input(in, false));
        ad::Var root = build(t, vars);
        return t.value(root)[0];
    };

    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(inputs.size());
    for (const ad::Tensor& in : inputs) vars.push_back(tape.input(in, true));
    ad::Var root = build(tape, vars);
    tape.backward(root);

    double worst = 0.0;
    std::vector<ad::Tensor> probe = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const ad::Tensor& g = tape.grad(vars[i]);
        for (std::size_t e = 0; e < inputs[i].numel(); ++e) {
            const double keep = probe[i][e];
            probe[i][e] = keep + h;
            const double fp = eval(probe);
            probe[i][e] = keep - h;
            const double fm = eval(probe);
            probe[i][e] = keep;
            worst = std::max(worst, gradcheck_rel_err(g[e], (fp - fm) / (2.0 * h)));
        }
    }
    return {name, worst, tol, worst < tol};
}

ad::Tensor rand_tensor(Rng& rng, std::vector<std::size_t> shape, double lo, double hi) {
    ad::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Magnitudes in [0.1, 1] with random sign: keeps relu checks away from 0.
ad::Tensor rand_signed(Rng& rng, std::vector<std::size_t> shape) {
    ad::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i)
        t[i] = rng.uniform(0.1, 1.0) * (rng.below(2) ? 1.0 : -1.0);
    return t;
}

// sum(x * r): a scalar root whose gradient reaches every output element.
ad::Var weigh(ad::Tape& t, ad::Var x, const ad::Tensor& r) {
    return ad::sum(ad::mul(x, t.constant(r)));
}

// Pre-activation magnitudes of the 2-layer critic on the given rows; the
// finite-difference step must not flip any relu, so draws are retried
// until every pre-activation clears a margin.
double min_preact(const MineNetwork& net, const ad::Tensor& rows) {
    const std::size_t n = rows.rows();
    double m = 1e300;
    std::vector<double> h1(100);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < 100; ++i) {
            double s = net.b1[i];
            for (std::size_t j = 0; j < net.d_in(); ++j) s += net.w1.at(i, j) * rows.at(r, j);
            m = std::min(m, std::fabs(s));
            h1[i] = std::max(0.0, s);
        }
        for (std::size_t i = 0; i < 100; ++i) {
            double s = net.b2[i];
            for (std::size_t j = 0; j < 100; ++j) s += net.w2.at(i, j) * h1[j];
            m = std::min(m, std::fabs(s));
        }
    }
    return m;
}

std::vector<double> critic_outputs(const MineNetwork& net, const ad::Tensor& rows) {
    const std::size_t n = rows.rows();
    std::vector<double> out(n);
    std::vector<double> h1(100), h2(100);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < 100; ++i) {
            double s = net.b1[i];
            for (std::size_t j = 0; j < net.d_in(); ++j) s += net.w1.at(i, j) * rows.at(r, j);
            h1[i] = std::max(0.0, s);
        }
        for (std::size_t i = 0; i < 100; ++i) {
            double s = net.b2[i];
            for (std::size_t j = 0; j < 100; ++j) s += net.w2.at(i, j) * h1[j];
            h2[i] = std::max(0.0, s);
        }
        double s = net.b3[0];
        for (std::size_t j = 0; j < 100; ++j) s += net.w3.at(0, j) * h2[j];
        out[r] = s;
    }
    return out;
}

std::vector<ad::Tensor> net_inputs(const MineNetwork& net) {
    return {net.w1, net.b1, net.w2, net.b2, net.w3, net.b3};
}

MineVars vars_from(const std::vector<ad::Var>& v, std::size_t cf, std::size_t cm,
                   std::size_t base) {
    MineVars mv;
    mv.c_fixed = cf;
    mv.c_moving = cm;
    mv.w1 = v[base + 0];
    mv.b1 = v[base + 1];
    mv.w2 = v[base + 2];
    mv.b2 = v[base + 3];
    mv.w3 = v[base + 4];
    mv.b3 = v[base + 5];
    return mv;
}

} // namespace

std::vector<GradCheckReport> run_gradcheck(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<GradCheckReport> out;
    const double kTol = 1e-4;
    const double kH = 1e-5;

    // Weighted binary elementwise ops share one input pair.
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto b = rand_signed(rng, {3, 4});
        const auto r = rand_tensor(rng, {3, 4}, 0.5, 1.5);
        const auto bin = [&](const std::string& name, ad::Var (*op)(ad::Var, ad::Var)) {
            out.push_back(check(name, {a, b},
                                [r, op](ad::Tape& t, const std::vector<ad::Var>& v) {
                                    return weigh(t, op(v[0], v[1]), r);
                                },
                                kTol, kH));
        };
        bin("add", &ad::add);
        bin("sub", &ad::sub);
        bin("mul", &ad::mul);
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto b = rand_tensor(rng, {3, 4}, 0.5, 1.5); // away from zero
        const auto r = rand_tensor(rng, {3, 4}, 0.5, 1.5);
        out.push_back(check("div", {a, b},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::div(v[0], v[1]), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto b = rand_signed(rng, {4, 2});
        const auto r = rand_tensor(rng, {3, 2}, 0.5, 1.5);
        out.push_back(check("matmul", {a, b},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::matmul(v[0], v[1]), r);
                            },
                            kTol, kH));
    }
    {
        const auto unary = [&](const std::string& name, ad::Var (*op)(ad::Var), double lo,
                               double hi) {
            const auto a = (lo < 0.0) ? rand_signed(rng, {3, 4}) : rand_tensor(rng, {3, 4}, lo, hi);
            const auto r = rand_tensor(rng, {3, 4}, 0.5, 1.5);
            out.push_back(check(name, {a},
                                [r, op](ad::Tape& t, const std::vector<ad::Var>& v) {
                                    return weigh(t, op(v[0]), r);
                                },
                                kTol, kH));
        };
        unary("relu", &ad::relu, -1.0, 1.0); // rand_signed keeps |x| >= 0.1
        unary("exp", &ad::exp, -1.0, 1.0);
        unary("log", &ad::log, 0.5, 2.0);
        unary("sqrt", &ad::sqrt, 0.5, 2.0);
    }
    out.push_back(check("sum", {rand_signed(rng, {3, 4})},
                        [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::sum(v[0]); },
                        kTol, kH));
    out.push_back(check("mean", {rand_signed(rng, {3, 4})},
                        [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::mean(v[0]); },
                        kTol, kH));
    {
        // Distinct entries with a comfortable gap so the max stays put
        // under the probe step.
        ad::Tensor a({3, 4});
        const auto p = rng.permutation(12);
        for (std::size_t i = 0; i < 12; ++i)
            a[i] = 0.05 * static_cast<double>(p[i]) + rng.uniform(0.0, 0.01);
        out.push_back(check("max_reduce", {a},
                            [](ad::Tape&, const std::vector<ad::Var>& v) {
                                return ad::max_reduce(v[0]);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto r = rand_tensor(rng, {3, 4}, 0.5, 1.5);
        out.push_back(check("scalar_mul", {a},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::scalar_mul(v[0], 1.7), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {5, 3});
        const auto r = rand_tensor(rng, {5, 3}, 0.5, 1.5);
        out.push_back(check("gather_rows", {a},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                // repeated index exercises the scatter-add
                                return weigh(t, ad::gather_rows(v[0], {0, 2, 2, 4, 1}), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto r = rand_tensor(rng, {6, 2}, 0.5, 1.5);
        out.push_back(check("reshape", {a},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::reshape(v[0], {6, 2}), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto r = rand_tensor(rng, {4, 3}, 0.5, 1.5);
        out.push_back(check("transpose", {a},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::transpose(v[0]), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 4});
        const auto b = rand_signed(rng, {4});
        const auto r = rand_tensor(rng, {3, 4}, 0.5, 1.5);
        out.push_back(check("add_rowvec", {a, b},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::add_rowvec(v[0], v[1]), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 2});
        const auto b = rand_signed(rng, {3, 3});
        const auto r = rand_tensor(rng, {3, 5}, 0.5, 1.5);
        out.push_back(check("concat_cols", {a, b},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::concat_cols(v[0], v[1]), r);
                            },
                            kTol, kH));
    }
    {
        const auto a = rand_signed(rng, {3, 5});
        const auto r = rand_tensor(rng, {3, 3}, 0.5, 1.5);
        out.push_back(check("slice_cols", {a},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::slice_cols(v[0], 1, 4), r);
                            },
                            kTol, kH));
    }
    {
        // Interior points well away from pixel centers: the sampler is
        // piecewise linear with kinks on the integer-pixel grid.
        const auto grid = std::make_shared<const ad::Tensor>(rand_tensor(rng, {6, 7, 2}, 0.0, 1.0));
        ad::Tensor pts({5, 2});
        for (std::size_t i = 0; i < 5; ++i) {
            const double px = 0.6 + static_cast<double>(rng.below(5)) + rng.uniform(-0.25, 0.25);
            const double py = 0.6 + static_cast<double>(rng.below(4)) + rng.uniform(-0.25, 0.25);
            pts.at(i, 0) = norm_from_px(px, 7);
            pts.at(i, 1) = norm_from_px(py, 6);
        }
        const auto r = rand_tensor(rng, {5, 2}, 0.5, 1.5);
        out.push_back(check("bilinear_sample", {pts},
                            [r, grid](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, ad::bilinear_sample(grid, v[0]), r);
                            },
                            kTol, kH));
    }
    {
        // Critic MLP: gradient w.r.t. every weight, bias, and input row.
        // Redraw until every relu pre-activation clears the margin.
        MineNetwork net;
        ad::Tensor pairs;
        for (std::uint64_t attempt = 0;; ++attempt) {
            Rng draw(seed + 1000 + attempt);
            net = MineNetwork::init(1, 1, draw);
            pairs = rand_tensor(draw, {8, 2}, 0.0, 1.0);
            if (min_preact(net, pairs) > 2e-4) break;
            if (attempt > 500) throw NumericalError("gradcheck: no margin-safe mlp draw");
        }
        std::vector<ad::Tensor> ins = net_inputs(net);
        ins.push_back(pairs);
        const auto r = rand_tensor(rng, {8, 1}, 0.5, 1.5);
        out.push_back(check("mlp", ins,
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                MineVars mv = vars_from(v, 1, 1, 0);
                                return weigh(t, mlp_forward(t, mv, v[6]), r);
                            },
                            kTol, kH));
    }
    {
        // Larger step for the tighter tolerance: at h=1e-5 the difference
        // quotient's roundoff alone is near 5e-7, too close to 1e-6.
        const auto c = rand_tensor(rng, {6}, -0.15, 0.15);
        const auto r = rand_tensor(rng, {3, 3}, 0.5, 1.5);
        out.push_back(check("mexp", {c},
                            [r](ad::Tape& t, const std::vector<ad::Var>& v) {
                                return weigh(t, mexp(t, v[0]), r);
                            },
                            1e-6, 1e-4));
    }
    {
        // DV bound end to end with a frozen permutation. The marginal side
        // takes a max before exponentiating, so redraw until the top two
        // marginal outputs are separated and every relu has margin.
        const std::size_t n = 6;
        MineNetwork net;
        ad::Tensor p, q;
        std::vector<std::size_t> perm;
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 500) throw NumericalError("gradcheck: no margin-safe dv draw");
            Rng draw(seed + 5000 + attempt);
            net = MineNetwork::init(1, 1, draw);
            p = rand_tensor(draw, {n, 1}, 0.0, 1.0);
            q = rand_tensor(draw, {n, 1}, 0.0, 1.0);
            perm = draw.permutation(n);
            ad::Tensor joint({n, 2}), marg({n, 2});
            for (std::size_t i = 0; i < n; ++i) {
                joint.at(i, 0) = p.at(i, 0);
                joint.at(i, 1) = q.at(i, 0);
                marg.at(i, 0) = p.at(i, 0);
                marg.at(i, 1) = q.at(perm[i], 0);
            }
            if (std::min(min_preact(net, joint), min_preact(net, marg)) <= 2e-4) continue;
            std::vector<double> f = critic_outputs(net, marg);
            std::sort(f.begin(), f.end());
            if (f[n - 1] - f[n - 2] > 2e-4) break;
        }
        std::vector<ad::Tensor> ins = net_inputs(net);
        ins.push_back(p);
        ins.push_back(q);
        out.push_back(check("dv_bound", ins,
                            [perm](ad::Tape& t, const std::vector<ad::Var>& v) {
                                MineVars mv = vars_from(v, 1, 1, 0);
                                return dv_bound_with_perm(t, mv, v[6], v[7], perm);
                            },
                            kTol, kH));
    }
    return out;
}

} // namespace drmime
