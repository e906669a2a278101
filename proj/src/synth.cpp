#include "drmime/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "drmime/coords.hpp"
#include "drmime/errors.hpp"
#include "drmime/rng.hpp"
#include "drmime/warp.hpp"

namespace drmime {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_params(const SynthParams& p) {
    if (std::fabs(p.rot_deg) > 30.0)
        throw InvalidArgument("synth: |rot| must be <= 30 degrees");
    if (std::fabs(p.tx) > 0.2 || std::fabs(p.ty) > 0.2)
        throw InvalidArgument("synth: |tx|, |ty| must be <= 0.2");
    if (p.scale < 0.8 || p.scale > 1.25)
        throw InvalidArgument("synth: scale must be in [0.8, 1.25]");
}

} // namespace

Coeffs6 synth_coeffs(const SynthParams& p) {
    check_params(p);
    const double theta = p.rot_deg * kPi / 180.0;
    const double lns = std::log(p.scale);

    // The upper-left block of B is lns*I + theta*J, isomorphic to the
    // complex number k below; the translation column (a,b) must satisfy
    // phi(K)(a+ib) = tx+i*ty with phi(K) = (e^K - 1)/K so that mexp's
    // translation part comes out as exactly the requested (tx, ty).
    const std::complex<double> k(lns, theta);
    std::complex<double> ab(p.tx, p.ty);
    if (std::abs(k) > 0.0) ab = ab * k / (std::exp(k) - 1.0);

    return {ab.real(), ab.imag(), theta, lns, 0.0, 0.0};
}

SynthOutput make_synth_pair(const Image& fixed, const SynthParams& p) {
    check_params(p);
    LieParams lie;
    lie.v = synth_coeffs(p);
    const Mat3 h_truth = compose_params(lie, 1);

    SynthOutput out{
        warp::warp_image(fixed, h_truth.inverse_affine(), fixed.height(), fixed.width()),
        {},
        make_record(lie, fixed.height(), fixed.width(), fixed.height(), fixed.width()),
    };

    // 5x5 interior grid; keep pairs whose moving-side point stays in bounds.
    const std::size_t w = fixed.width(), hh = fixed.height();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            const double fx = 0.15 + 0.175 * static_cast<double>(j);
            const double fy = 0.15 + 0.175 * static_cast<double>(i);
            const double xf = fx * static_cast<double>(w - 1);
            const double yf = fy * static_cast<double>(hh - 1);
            double xn = 0.0, yn = 0.0;
            h_truth.apply(norm_from_px(xf, w), norm_from_px(yf, hh), xn, yn);
            const double xm = px_from_norm(xn, w);
            const double ym = px_from_norm(yn, hh);
            if (xm < 0.0 || ym < 0.0 || xm > static_cast<double>(w - 1) ||
                ym > static_cast<double>(hh - 1))
                continue;
            out.landmarks.push_back({xf, yf, xm, ym});
        }
    if (out.landmarks.size() < 10)
        throw InvalidArgument("synth: transform leaves fewer than 10 landmarks in bounds");
    return out;
}

Image make_test_image(std::size_t h, std::size_t w, std::size_t channels, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> data(h * w * channels);

    for (std::size_t ch = 0; ch < channels; ++ch) {
        // smooth background: ramp + two gratings
        const double gang1 = rng.uniform(0.0, kPi);
        const double gang2 = rng.uniform(0.0, kPi);
        const double freq1 = rng.uniform(3.0, 6.0);
        const double freq2 = rng.uniform(7.0, 12.0);

        struct Blob {
            double cx, cy, s, a;
        };
        std::vector<Blob> blobs(8);
        for (Blob& b : blobs)
            b = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.15),
                 rng.uniform(-0.5, 0.5)};

        // sharp-edged discs give the edge detector real contours
        struct Disc {
            double cx, cy, r, a;
        };
        std::vector<Disc> discs(6);
        for (Disc& d : discs)
            d = {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.04, 0.12),
                 rng.uniform(-0.45, 0.45)};

        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const double x = static_cast<double>(c) / static_cast<double>(w - 1);
                const double y = static_cast<double>(r) / static_cast<double>(h - 1);
                double v = 0.45 + 0.1 * (x - y);
                v += 0.08 * std::sin(2.0 * kPi * freq1 * (x * std::cos(gang1) + y * std::sin(gang1)));
                v += 0.05 * std::sin(2.0 * kPi * freq2 * (x * std::cos(gang2) + y * std::sin(gang2)));
                for (const Blob& b : blobs) {
                    const double dx = x - b.cx, dy = y - b.cy;
                    v += b.a * std::exp(-(dx * dx + dy * dy) / (2.0 * b.s * b.s));
                }
                for (const Disc& d : discs) {
                    const double dx = x - d.cx, dy = y - d.cy;
                    if (dx * dx + dy * dy < d.r * d.r) v += d.a;
                }
                data[(r * w + c) * channels + ch] = v;
            }
    }

    for (double& v : data) v = std::clamp(v, 0.02, 0.98);
    return Image(h, w, channels, std::move(data));
}

} // namespace drmime
