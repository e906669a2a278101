// drmime command line: register / warp / eval / synth / mi-selftest /
// gradcheck. Exit codes: 0 ok, 2 usage, 3 I/O, 4 numerical.

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "drmime/errors.hpp"
#include "drmime/gradcheck.hpp"
#include "drmime/image_io.hpp"
#include "drmime/landmarks.hpp"
#include "drmime/metrics.hpp"
#include "drmime/mine.hpp"
#include "drmime/registration.hpp"
#include "drmime/synth.hpp"
#include "drmime/transform_record.hpp"
#include "drmime/warp.hpp"

namespace {

using namespace drmime;

struct Dims {
    std::size_t h = 0, w = 0;
    bool set = false;
};

Dims parse_dims(const std::string& s) {
    Dims d;
    char extra = 0;
    unsigned long long h = 0, w = 0;
    if (std::sscanf(s.c_str(), "%llux%llu%c", &h, &w, &extra) != 2 || h == 0 || w == 0)
        throw InvalidArgument("dims must look like HxW, got: " + s);
    d.h = static_cast<std::size_t>(h);
    d.w = static_cast<std::size_t>(w);
    d.set = true;
    return d;
}

void check_dims(const char* what, const Dims& d, std::size_t h, std::size_t w) {
    if (!d.set) return;
    if (d.h != h || d.w != w)
        throw InvalidArgument(std::string(what) + " dims " + std::to_string(d.h) + "x" +
                              std::to_string(d.w) + " do not match the transform record's " +
                              std::to_string(h) + "x" + std::to_string(w));
}

std::string derive_diff_path(const std::string& out) {
    const auto dot = out.rfind('.');
    if (dot == std::string::npos) return out + ".diff";
    return out.substr(0, dot) + ".diff" + out.substr(dot);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// key=value config for a subcommand. Keys are the long option names
// without the leading dashes; values given on the command line win.
void apply_config_file(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config " + path + " line " + std::to_string(lineno) +
                                  ": expected key=value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw InvalidArgument("config " + path + " line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "' for subcommand " +
                                  sub.get_name());
        if (opt->count() > 0) continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InvalidArgument("config " + path + ": key '" + key + "': " + e.what());
        }
    }
}

void print_naed(const NaedReport& r) {
    std::printf("NAED %.17g std %.17g n %zu\n", r.mean, r.stddev, r.distances.size());
}

struct RegisterArgs {
    std::string fixed, moving, out, trace, landmarks;
    RegistrationConfig cfg;
};

int run_register(const RegisterArgs& a) {
    const Image fixed = load_image(a.fixed);
    const Image moving = load_image(a.moving);
    const RegistrationResult res = register_images(fixed, moving, a.cfg);
    write_transform(a.out, res.record);
    if (!a.trace.empty()) write_trace_csv(a.trace, res.trace);
    std::printf("levels %zu\n", res.levels_used);
    std::printf("iterations %zu\n", res.iterations_run);
    std::printf("final_objective %.17g\n", res.final_objective);
    std::printf("wall_seconds %.3f\n", res.wall_seconds);
    std::printf("wrote %s\n", a.out.c_str());
    if (!a.landmarks.empty()) {
        const LandmarkSet lm = read_landmarks(a.landmarks);
        print_naed(naed(lm, res.record.matrix, res.record.fixed_h, res.record.fixed_w,
                        res.record.moving_h, res.record.moving_w));
    }
    return 0;
}

struct WarpArgs {
    std::string image, transform, out, diff_fixed, diff_out;
};

int run_warp(const WarpArgs& a) {
    const TransformRecord rec = read_transform(a.transform);
    const Image moving = load_image(a.image);
    if (moving.height() != rec.moving_h || moving.width() != rec.moving_w)
        throw InvalidArgument("image dims do not match the transform record's moving_size");
    const Image warped = warp::warp_image(moving, rec.matrix, rec.fixed_h, rec.fixed_w);
    save_image(a.out, warped);
    std::printf("wrote %s\n", a.out.c_str());
    if (!a.diff_fixed.empty()) {
        const Image fixed = load_image(a.diff_fixed);
        if (fixed.height() != warped.height() || fixed.width() != warped.width() ||
            fixed.channels() != warped.channels())
            throw InvalidArgument("diff image dims/channels do not match the warped output");
        Image diff = warped;
        for (std::size_t i = 0; i < diff.data().size(); ++i)
            diff.data()[i] = std::fabs(fixed.data()[i] - warped.data()[i]);
        const std::string path = a.diff_out.empty() ? derive_diff_path(a.out) : a.diff_out;
        save_image(path, diff);
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

struct EvalArgs {
    std::string landmarks, transform, out_csv;
    std::string fixed_dims, moving_dims;
};

int run_eval(const EvalArgs& a) {
    const TransformRecord rec = read_transform(a.transform);
    const LandmarkSet lm = read_landmarks(a.landmarks);
    if (!a.fixed_dims.empty())
        check_dims("--fixed-dims", parse_dims(a.fixed_dims), rec.fixed_h, rec.fixed_w);
    if (!a.moving_dims.empty())
        check_dims("--moving-dims", parse_dims(a.moving_dims), rec.moving_h, rec.moving_w);
    for (std::size_t i = 0; i < lm.size(); ++i) {
        const LandmarkPair& p = lm[i];
        const bool in_f = p.x_fixed >= 0 && p.x_fixed <= double(rec.fixed_w - 1) &&
                          p.y_fixed >= 0 && p.y_fixed <= double(rec.fixed_h - 1);
        const bool in_m = p.x_moving >= 0 && p.x_moving <= double(rec.moving_w - 1) &&
                          p.y_moving >= 0 && p.y_moving <= double(rec.moving_h - 1);
        if (!in_f || !in_m)
            std::fprintf(stderr, "warning: landmark %zu lies outside the image bounds\n", i);
    }
    const NaedReport r = naed(lm, rec.matrix, rec.fixed_h, rec.fixed_w, rec.moving_h,
                              rec.moving_w);
    if (!a.out_csv.empty()) write_naed_csv(a.out_csv, r);
    print_naed(r);
    return 0;
}

struct SynthArgs {
    std::string image, out_moving, out_landmarks, out_truth;
    SynthParams params;
};

int run_synth(const SynthArgs& a) {
    const Image fixed = load_image(a.image);
    const SynthOutput out = make_synth_pair(fixed, a.params);
    save_image(a.out_moving, out.moving);
    write_landmarks(a.out_landmarks, out.landmarks);
    write_transform(a.out_truth, out.truth);
    std::printf("wrote %s\n", a.out_moving.c_str());
    std::printf("wrote %s\n", a.out_landmarks.c_str());
    std::printf("wrote %s\n", a.out_truth.c_str());
    std::printf("landmarks %zu\n", out.landmarks.size());
    return 0;
}

struct SelftestArgs {
    std::vector<double> rhos;
    std::size_t n = 10000;
    std::size_t steps = 2000;
    std::uint64_t seed = 17;
};

int run_selftest(const SelftestArgs& a) {
    std::vector<double> rhos = a.rhos.empty() ? std::vector<double>{0.0, 0.5, 0.9} : a.rhos;
    bool all_pass = true;
    for (double rho : rhos) {
        const SelftestResult r = mine_selftest(rho, a.n, a.steps, a.seed);
        std::printf("rho %g estimate %.6f closed_form %.6f stderr %.6f %s\n", r.rho, r.estimate,
                    r.closed_form, r.stderr_estimate, r.pass ? "PASS" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 4;
}

int run_gradcheck_cmd(std::uint64_t seed) {
    const std::vector<GradCheckReport> reports = run_gradcheck(seed);
    bool all_pass = true;
    for (const GradCheckReport& r : reports) {
        std::printf("%-16s max_rel_err %.3e tol %.0e %s\n", r.name.c_str(), r.max_rel_err, r.tol,
                    r.pass ? "PASS" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRMIME: unsupervised affine image registration by neural mutual information"};
    app.require_subcommand(1);

    RegisterArgs reg;
    WarpArgs wrp;
    EvalArgs evl;
    SynthArgs syn;
    SelftestArgs mst;
    std::uint64_t gc_seed = 17;
    std::string config_path; // shared: exactly one subcommand parses per run

    const std::map<std::string, Metric> metric_names{
        {"mine", Metric::Mine}, {"mse", Metric::Mse}, {"ncc", Metric::Ncc}};
    const std::map<std::string, SamplerKind> sampler_names{{"canny", SamplerKind::Canny},
                                                           {"random", SamplerKind::Random}};

    CLI::App* reg_cmd = app.add_subcommand("register", "Estimate the affine aligning two images");
    reg_cmd->add_option("--fixed", reg.fixed, "Fixed (reference) image, PGM/PPM")->required();
    reg_cmd->add_option("--moving", reg.moving, "Moving image, PGM/PPM")->required();
    reg_cmd->add_option("--out", reg.out, "Output transform JSON")->required();
    reg_cmd->add_option("--trace", reg.trace, "Per-iteration objective CSV");
    reg_cmd->add_option("--landmarks", reg.landmarks,
                        "Landmark CSV: also print the final NAED");
    reg_cmd->add_option("--metric", reg.cfg.metric, "Similarity metric")
        ->transform(CLI::CheckedTransformer(metric_names, CLI::ignore_case))
        ->default_str("mine");
    reg_cmd->add_option("--levels", reg.cfg.levels, "Pyramid levels")->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--iters", reg.cfg.iterations, "Optimizer iterations")->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--sampler", reg.cfg.sampler, "Pixel sampler")
        ->transform(CLI::CheckedTransformer(sampler_names, CLI::ignore_case))
        ->default_str("canny");
    reg_cmd->add_option("--sample-frac", reg.cfg.sample_fraction,
                        "Random-sampler fraction of pixels per level")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    reg_cmd->add_option("--canny-sigma", reg.cfg.canny.sigma, "Canny smoothing sigma")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--canny-low", reg.cfg.canny.low_frac,
                        "Canny low threshold, fraction of max gradient")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    reg_cmd->add_option("--canny-high", reg.cfg.canny.high_frac,
                        "Canny high threshold, fraction of max gradient")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    reg_cmd->add_option("--sample-cap", reg.cfg.canny.cap, "Max edge samples per level")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--seed", reg.cfg.seed, "RNG seed")->capture_default_str()->envname("DRMIME_SEED");
    reg_cmd->add_flag_callback(
        "--no-matrix-exp", [&reg] { reg.cfg.use_matrix_exp = false; },
        "Train the six matrix entries directly instead of Lie coefficients");
    reg_cmd->add_flag_callback("--no-v1", [&reg] { reg.cfg.use_v1 = false; },
                               "Disable the finest-level correction vector");
    reg_cmd->add_option("--lr-theta", reg.cfg.lr_theta, "Critic learning rate")->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--lr-v", reg.cfg.lr_v, "Transform learning rate")->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--lr-v1", reg.cfg.lr_v1, "Finest-level correction learning rate")->capture_default_str()
        ->check(CLI::PositiveNumber);
    reg_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    CLI::App* warp_cmd = app.add_subcommand("warp", "Resample an image under a transform");
    warp_cmd->add_option("--image", wrp.image, "Moving image to resample")->required();
    warp_cmd->add_option("--transform", wrp.transform, "Transform JSON")->required();
    warp_cmd->add_option("--out", wrp.out, "Warped output image (.pgm/.ppm)")->required();
    warp_cmd->add_option("--diff", wrp.diff_fixed,
                         "Fixed image: also write |fixed - warped| per channel");
    warp_cmd->add_option("--diff-out", wrp.diff_out,
                         "Difference image path (default: out path with .diff)");
    warp_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    CLI::App* eval_cmd = app.add_subcommand("eval", "Landmark error (NAED) of a transform");
    eval_cmd->add_option("--landmarks", evl.landmarks, "Landmark CSV")->required();
    eval_cmd->add_option("--transform", evl.transform, "Transform JSON")->required();
    eval_cmd->add_option("--fixed-dims", evl.fixed_dims, "HxW check against the record");
    eval_cmd->add_option("--moving-dims", evl.moving_dims, "HxW check against the record");
    eval_cmd->add_option("--out-csv", evl.out_csv, "Write per-pair distances CSV");
    eval_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    CLI::App* synth_cmd = app.add_subcommand("synth", "Make a synthetic pair with known truth");
    synth_cmd->add_option("--image", syn.image, "Fixed image")->required();
    synth_cmd->add_option("--rot", syn.params.rot_deg, "Rotation, degrees, |rot| <= 30")->capture_default_str();
    synth_cmd->add_option("--tx", syn.params.tx, "x translation, normalized, |tx| <= 0.2")->capture_default_str();
    synth_cmd->add_option("--ty", syn.params.ty, "y translation, normalized, |ty| <= 0.2")->capture_default_str();
    synth_cmd->add_option("--scale", syn.params.scale, "Isotropic scale in [0.8, 1.25]")->capture_default_str();
    synth_cmd->add_option("--out-moving", syn.out_moving, "Warped moving image")->required();
    synth_cmd->add_option("--out-landmarks", syn.out_landmarks, "Landmark CSV")->required();
    synth_cmd->add_option("--out-truth", syn.out_truth, "Ground-truth transform JSON")
        ->required();
    synth_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    CLI::App* mst_cmd = app.add_subcommand(
        "mi-selftest", "Train the critic on correlated Gaussians with known MI");
    mst_cmd->add_option("--rho", mst.rhos, "Correlations to test (default 0 0.5 0.9)");
    mst_cmd->add_option("--n", mst.n, "Sample count")->capture_default_str()->check(CLI::PositiveNumber);
    mst_cmd->add_option("--steps", mst.steps, "Optimizer steps")->capture_default_str()
        ->check(CLI::PositiveNumber);
    mst_cmd->add_option("--seed", mst.seed, "RNG seed")->capture_default_str()->envname("DRMIME_SEED");
    mst_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    CLI::App* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
    gc_cmd->add_option("--seed", gc_seed, "RNG seed")->capture_default_str()->envname("DRMIME_SEED");
    gc_cmd->add_option("--config", config_path, "key=value file; flags win over file values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty())
            for (CLI::App* sub : {reg_cmd, warp_cmd, eval_cmd, synth_cmd, mst_cmd, gc_cmd})
                if (sub->parsed()) apply_config_file(*sub, config_path);
        if (reg_cmd->parsed()) return run_register(reg);
        if (warp_cmd->parsed()) return run_warp(wrp);
        if (eval_cmd->parsed()) return run_eval(evl);
        if (synth_cmd->parsed()) return run_synth(syn);
        if (mst_cmd->parsed()) return run_selftest(mst);
        if (gc_cmd->parsed()) return run_gradcheck_cmd(gc_seed);
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
