#include "drmime/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "drmime/errors.hpp"

namespace drmime {

SampleSet random_sample(std::size_t h, std::size_t w, double fraction, Rng& rng) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw InvalidArgument("random_sample: fraction must be in (0,1]");
    const std::size_t total = h * w;
    std::size_t n = static_cast<std::size_t>(fraction * static_cast<double>(total));
    if (n == 0) n = total;
    SampleSet out;
    out.rows.reserve(n);
    out.cols.reserve(n);
    for (std::size_t flat : rng.sample_without_replacement(total, n)) {
        out.rows.push_back(flat / w);
        out.cols.push_back(flat % w);
    }
    return out;
}

namespace {

// Separable Gaussian smoothing with an explicit sigma (the pyramid's fixed
// binomial kernel is too narrow for edge detection), edge-replicated.
std::vector<double> gaussian_smooth(const std::vector<double>& in, std::size_t h, std::size_t w,
                                    double sigma) {
    if (sigma <= 0.0) return in;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-0.5 * (t * t) / (sigma * sigma));
        kernel[static_cast<std::size_t>(t + radius)] = v;
        ksum += v;
    }
    for (double& v : kernel) v /= ksum;

    const auto clampi = [](long i, std::size_t n) {
        return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n - 1)));
    };
    std::vector<double> tmp(in.size()), out(in.size());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0.0;
            for (int t = -radius; t <= radius; ++t)
                s += kernel[static_cast<std::size_t>(t + radius)] *
                     in[r * w + clampi(static_cast<long>(c) + t, w)];
            tmp[r * w + c] = s;
        }
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0.0;
            for (int t = -radius; t <= radius; ++t)
                s += kernel[static_cast<std::size_t>(t + radius)] *
                     tmp[clampi(static_cast<long>(r) + t, h) * w + c];
            out[r * w + c] = s;
        }
    return out;
}

} // namespace

SampleSet canny_sample(const Image& img, const CannyOptions& opt, Rng& rng) {
    if (!(opt.low_frac >= 0.0 && opt.high_frac >= opt.low_frac && opt.high_frac <= 1.0))
        throw InvalidArgument("canny_sample: need 0 <= low <= high <= 1");
    const Image gray = to_grayscale(img);
    const std::size_t h = gray.height(), w = gray.width();
    const std::vector<double> smooth = gaussian_smooth(gray.data(), h, w, opt.sigma);

    // Sobel 3x3; border ring left at zero gradient.
    std::vector<double> mag(h * w, 0.0);
    std::vector<double> gx_img(h * w, 0.0), gy_img(h * w, 0.0);
    double max_mag = 0.0;
    for (std::size_t r = 1; r + 1 < h; ++r)
        for (std::size_t c = 1; c + 1 < w; ++c) {
            const auto px = [&](std::size_t rr, std::size_t cc) { return smooth[rr * w + cc]; };
            const double gx = (px(r - 1, c + 1) + 2.0 * px(r, c + 1) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r, c - 1) + px(r + 1, c - 1));
            const double gy = (px(r + 1, c - 1) + 2.0 * px(r + 1, c) + px(r + 1, c + 1)) -
                              (px(r - 1, c - 1) + 2.0 * px(r - 1, c) + px(r - 1, c + 1));
            gx_img[r * w + c] = gx;
            gy_img[r * w + c] = gy;
            const double m = std::hypot(gx, gy);
            mag[r * w + c] = m;
            max_mag = std::max(max_mag, m);
        }

    std::vector<std::size_t> edge_rows, edge_cols;
    if (max_mag > 0.0) {
        const double high = opt.high_frac * max_mag;
        const double low = opt.low_frac * max_mag;

        // Non-maximum suppression along the quantized gradient direction.
        std::vector<unsigned char> state(h * w, 0); // 0 none, 1 weak, 2 strong
        for (std::size_t r = 1; r + 1 < h; ++r)
            for (std::size_t c = 1; c + 1 < w; ++c) {
                const double m = mag[r * w + c];
                if (m < low) continue;
                double angle = std::atan2(gy_img[r * w + c], gx_img[r * w + c]) * 180.0 /
                               3.14159265358979323846;
                if (angle < 0.0) angle += 180.0;
                double n1, n2;
                if (angle < 22.5 || angle >= 157.5) { // horizontal gradient -> vertical edge
                    n1 = mag[r * w + c - 1];
                    n2 = mag[r * w + c + 1];
                } else if (angle < 67.5) { // diagonal
                    n1 = mag[(r - 1) * w + c + 1];
                    n2 = mag[(r + 1) * w + c - 1];
                } else if (angle < 112.5) { // vertical gradient -> horizontal edge
                    n1 = mag[(r - 1) * w + c];
                    n2 = mag[(r + 1) * w + c];
                } else {
                    n1 = mag[(r - 1) * w + c - 1];
                    n2 = mag[(r + 1) * w + c + 1];
                }
                if (m >= n1 && m >= n2) state[r * w + c] = (m >= high) ? 2 : 1;
            }

        // Hysteresis: keep weak pixels 8-connected to a strong one.
        std::vector<unsigned char> keep(h * w, 0);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < h * w; ++i)
            if (state[i] == 2) {
                keep[i] = 1;
                stack.push_back(i);
            }
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const std::size_t r = i / w, c = i % w;
            for (long dr = -1; dr <= 1; ++dr)
                for (long dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const long rr = static_cast<long>(r) + dr;
                    const long cc = static_cast<long>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w))
                        continue;
                    const std::size_t j = static_cast<std::size_t>(rr) * w +
                                          static_cast<std::size_t>(cc);
                    if (state[j] == 1 && !keep[j]) {
                        keep[j] = 1;
                        stack.push_back(j);
                    }
                }
        }
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c)
                if (keep[r * w + c]) {
                    edge_rows.push_back(r);
                    edge_cols.push_back(c);
                }
    }

    if (edge_rows.size() < opt.min_edges)
        return random_sample(h, w, opt.fallback_fraction, rng);

    SampleSet out;
    if (edge_rows.size() > opt.cap) {
        for (std::size_t k : rng.sample_without_replacement(edge_rows.size(), opt.cap)) {
            out.rows.push_back(edge_rows[k]);
            out.cols.push_back(edge_cols[k]);
        }
    } else {
        out.rows = std::move(edge_rows);
        out.cols = std::move(edge_cols);
    }
    return out;
}

} // namespace drmime
