#include "drmime/registration.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "drmime/coords.hpp"
#include "drmime/errors.hpp"
#include "drmime/lie_affine.hpp"
#include "drmime/warp.hpp"

namespace drmime {

namespace {

// Sampled fixed-image values and homogeneous normalized coordinates for
// one level; constant across the tape, rebuilt only when samples change.
struct LevelBatch {
    ad::Tensor pts_h;      // {n,3}, rows (x, y, 1)
    ad::Tensor fixed_vals; // {n, c_fixed}
};

LevelBatch make_batch(const Image& level_img, const SampleSet& s) {
    const std::size_t n = s.size();
    LevelBatch b{ad::Tensor({n, 3}), ad::Tensor({n, level_img.channels()})};
    for (std::size_t i = 0; i < n; ++i) {
        b.pts_h.at(i, 0) = norm_from_px(static_cast<double>(s.cols[i]), level_img.width());
        b.pts_h.at(i, 1) = norm_from_px(static_cast<double>(s.rows[i]), level_img.height());
        b.pts_h.at(i, 2) = 1.0;
        for (std::size_t k = 0; k < level_img.channels(); ++k)
            b.fixed_vals.at(i, k) = level_img.at(s.rows[i], s.cols[i], k);
    }
    return b;
}

ad::Tensor gather_plain(const ad::Tensor& t, const std::vector<std::size_t>& idx) {
    ad::Tensor out({idx.size(), t.cols()});
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t c = 0; c < t.cols(); ++c) out.at(i, c) = t.at(idx[i], c);
    return out;
}

ad::Var ncc_term(ad::Tape& tape, ad::Var p, ad::Var q) {
    const std::size_t n = tape.value(p).rows();
    ad::Var ones_col = tape.constant(ad::Tensor::full({n, 1}, 1.0));
    ad::Var ones_row = tape.constant(ad::Tensor::full({1, n}, 1.0));
    const double inv_n = 1.0 / static_cast<double>(n);
    ad::Var pc = ad::sub(p, ad::matmul(ones_col, ad::scalar_mul(ad::matmul(ones_row, p), inv_n)));
    ad::Var qc = ad::sub(q, ad::matmul(ones_col, ad::scalar_mul(ad::matmul(ones_row, q), inv_n)));
    ad::Var num = ad::sum(ad::mul(pc, qc));
    ad::Var den2 = ad::mul(ad::sum(ad::mul(pc, pc)), ad::sum(ad::mul(qc, qc)));
    if (tape.value(den2)[0] <= 0.0)
        throw NumericalError("ncc objective: zero variance in sampled batch");
    return ad::div(num, ad::sqrt(den2));
}

} // namespace

ad::Var objective(ad::Tape& tape, const Pyramid& fixed,
                  const std::vector<std::shared_ptr<const ad::Tensor>>& moving_grids,
                  const std::vector<SampleSet>& samples, Metric metric, ad::Var h, ad::Var h1,
                  const MineVars* net, const PermProvider& perms, std::size_t* levels_used) {
    const std::size_t levels = fixed.count();
    if (moving_grids.size() != levels || samples.size() != levels)
        throw InvalidArgument("objective: pyramid/grid/sample level counts differ");
    if (metric == Metric::Mine && net == nullptr)
        throw InvalidArgument("objective: mine metric needs a network");

    ad::Var total{};
    std::size_t used = 0;
    for (std::size_t l = 1; l <= levels; ++l) {
        const LevelBatch batch = make_batch(fixed.level(l), samples[l - 1]);
        ad::Var pts = tape.constant(batch.pts_h);
        ad::Var warped = apply(tape, l == 1 ? h1 : h, pts); // {n,2}

        const std::vector<std::size_t> valid = warp::valid_indices(tape.value(warped));
        if (valid.size() < 2) {
            std::fprintf(stderr, "warning: level %zu has %zu valid samples, skipping\n", l,
                         valid.size());
            continue;
        }
        ad::Var wv = valid.size() == samples[l - 1].size() ? warped
                                                           : ad::gather_rows(warped, valid);
        ad::Var q = warp::sample(moving_grids[l - 1], wv);
        ad::Var p = tape.constant(valid.size() == samples[l - 1].size()
                                      ? batch.fixed_vals
                                      : gather_plain(batch.fixed_vals, valid));

        ad::Var term{};
        switch (metric) {
            case Metric::Mine:
                term = dv_bound_with_perm(tape, *net, p, q, perms(l, valid.size()));
                break;
            case Metric::Mse: {
                if (tape.value(p).cols() != tape.value(q).cols())
                    throw InvalidArgument("objective: mse needs equal channel counts");
                ad::Var d = ad::sub(p, q);
                term = ad::scalar_mul(ad::mean(ad::mul(d, d)), -1.0);
                break;
            }
            case Metric::Ncc:
                if (tape.value(p).cols() != tape.value(q).cols())
                    throw InvalidArgument("objective: ncc needs equal channel counts");
                term = ncc_term(tape, p, q);
                break;
        }
        total = (used == 0) ? term : ad::add(total, term);
        ++used;
    }
    if (used == 0)
        throw NumericalError("objective: no overlap (every level lacked valid samples)");
    if (levels_used) *levels_used = used;
    return total;
}

namespace {

// Direct-matrix parameterization: the six trainable entries fill the top
// two rows; the bottom row is a constant (0,0,1).
ad::Var direct_matrix(ad::Tape& tape, ad::Var theta6) {
    ad::Tensor embed({9, 6});
    for (std::size_t i = 0; i < 6; ++i) embed.at(i, i) = 1.0;
    ad::Var top = ad::matmul(tape.constant(std::move(embed)), ad::reshape(theta6, {6, 1}));
    ad::Var bottom = tape.constant(ad::Tensor({3, 3}, {0, 0, 0, 0, 0, 0, 0, 0, 1}));
    return ad::add(ad::reshape(top, {3, 3}), bottom);
}

struct ParamState {
    ad::Tensor v{std::vector<std::size_t>{6}};
    ad::Tensor v1{std::vector<std::size_t>{6}};
    ad::Tensor theta{std::vector<std::size_t>{6}}; // direct mode
};

} // namespace

RegistrationResult register_images(const Image& fixed, const Image& moving,
                                   const RegistrationConfig& cfg) {
    if (cfg.iterations < 1) throw InvalidArgument("register: iterations must be >= 1");
    if (cfg.levels < 1) throw InvalidArgument("register: levels must be >= 1");
    if (!(cfg.lr_theta > 0.0 && cfg.lr_v > 0.0 && cfg.lr_v1 > 0.0))
        throw InvalidArgument("register: learning rates must be positive");
    if (cfg.metric != Metric::Mine && fixed.channels() != moving.channels())
        throw InvalidArgument("register: mse/ncc metrics need equal channel counts");

    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed_ms = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };

    const std::size_t feasible =
        std::min(max_levels(fixed.height(), fixed.width()), max_levels(moving.height(), moving.width()));
    std::size_t levels = cfg.levels;
    if (levels > feasible) {
        std::fprintf(stderr, "warning: clamping levels %zu -> %zu for image sizes %zux%zu / %zux%zu\n",
                     cfg.levels, feasible, fixed.height(), fixed.width(), moving.height(),
                     moving.width());
        levels = feasible;
    }

    const Pyramid fp = build_pyramid(fixed, levels);
    const Pyramid mp = build_pyramid(moving, levels);
    levels = std::min(fp.count(), mp.count());

    std::vector<std::shared_ptr<const ad::Tensor>> grids;
    grids.reserve(levels);
    for (std::size_t l = 1; l <= levels; ++l) grids.push_back(warp::image_grid(mp.level(l)));

    Rng rng(cfg.seed);
    MineNetwork net;
    if (cfg.metric == Metric::Mine)
        net = MineNetwork::init(fixed.channels(), moving.channels(), rng);

    std::vector<SampleSet> static_samples;
    if (cfg.sampler == SamplerKind::Canny) {
        for (std::size_t l = 1; l <= levels; ++l) {
            SampleSet s = canny_sample(fp.level(l), cfg.canny, rng);
            s.level = l;
            static_samples.push_back(std::move(s));
        }
    }

    ParamState ps;
    ps.theta = ad::Tensor({6}, {1, 0, 0, 0, 1, 0});

    AdamAms opt_theta(cfg.adam), opt_v(cfg.adam), opt_v1(cfg.adam);

    RegistrationResult res;
    res.trace.reserve(cfg.iterations);

    const auto draw_samples = [&]() -> std::vector<SampleSet> {
        if (cfg.sampler == SamplerKind::Canny) return static_samples;
        std::vector<SampleSet> out;
        out.reserve(levels);
        for (std::size_t l = 1; l <= levels; ++l) {
            SampleSet s = random_sample(fp.level(l).height(), fp.level(l).width(),
                                        cfg.sample_fraction, rng);
            s.level = l;
            out.push_back(std::move(s));
        }
        return out;
    };
    const PermProvider live_perms = [&rng](std::size_t, std::size_t n) {
        return rng.permutation(n);
    };

    // One evaluation: builds the tape and objective; out-params give the
    // variables needed for the update step.
    struct EvalVars {
        ad::Tape tape;
        ad::Var v, v1, theta, obj;
        MineVars mv;
    };
    const auto evaluate = [&](EvalVars& ev, bool trainable) {
        const std::vector<SampleSet> samples = draw_samples();
        ad::Var h{}, h1{};
        if (cfg.use_matrix_exp) {
            ev.v = ev.tape.input(ps.v, trainable);
            h = mexp(ev.tape, ev.v);
            if (cfg.use_v1) {
                ev.v1 = ev.tape.input(ps.v1, trainable);
                h1 = mexp(ev.tape, ad::add(ev.v, ev.v1));
            } else {
                h1 = h;
            }
        } else {
            ev.theta = ev.tape.input(ps.theta, trainable);
            h = direct_matrix(ev.tape, ev.theta);
            h1 = h;
        }
        const MineVars* netp = nullptr;
        if (cfg.metric == Metric::Mine) {
            ev.mv = stage(ev.tape, net, trainable);
            netp = &ev.mv;
        }
        ev.obj = objective(ev.tape, fp, grids, samples, cfg.metric, h, h1, netp, live_perms,
                           &res.levels_used);
    };

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        try {
            EvalVars ev;
            evaluate(ev, true);
            const double val = ev.tape.value(ev.obj)[0];
            ev.tape.backward(ev.obj);

            if (cfg.metric == Metric::Mine) {
                const auto pv = param_vars(ev.mv);
                auto pt = param_tensors(net);
                std::vector<ad::Tensor*> params(pt.begin(), pt.end());
                std::vector<const ad::Tensor*> grads;
                for (const ad::Var& v : pv) grads.push_back(&ev.tape.grad(v));
                opt_theta.step(params, grads, cfg.lr_theta);
            }
            if (cfg.use_matrix_exp) {
                opt_v.step({&ps.v}, {&ev.tape.grad(ev.v)}, cfg.lr_v);
                if (cfg.use_v1) opt_v1.step({&ps.v1}, {&ev.tape.grad(ev.v1)}, cfg.lr_v1);
            } else {
                opt_v.step({&ps.theta}, {&ev.tape.grad(ev.theta)}, cfg.lr_v);
            }

            res.trace.push_back({it, val, elapsed_ms()});
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (iteration " + std::to_string(it) + ")");
        }
    }
    res.iterations_run = cfg.iterations;

    {
        EvalVars ev;
        evaluate(ev, false);
        res.final_objective = ev.tape.value(ev.obj)[0];
    }

    if (cfg.use_matrix_exp) {
        LieParams lie;
        for (std::size_t i = 0; i < 6; ++i) {
            lie.v[i] = ps.v[i];
            lie.v1[i] = ps.v1[i];
        }
        res.record = make_record(lie, fixed.height(), fixed.width(), moving.height(),
                                 moving.width());
    } else {
        Mat3 h = Mat3::identity();
        for (std::size_t i = 0; i < 6; ++i) h.m[i] = ps.theta[i];
        res.record = make_direct_record(h, fixed.height(), fixed.width(), moving.height(),
                                        moving.width());
    }
    res.wall_seconds = elapsed_ms() / 1000.0;
    return res;
}

void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace: " + path);
    out << "iteration,objective,wall_ms\n";
    char buf[96];
    for (const TracePoint& t : trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.3f\n", t.iteration, t.objective, t.wall_ms);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace drmime
