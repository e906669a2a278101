#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "drmime/coords.hpp"

namespace drmime::detail {

// One bilinear lookup, shared by the differentiable sampling op and the
// plain image warper so the two can never drift apart.
//
// Pixel coordinates that land within 1e-9 of an integer are snapped to it
// first; without the snap, round-tripping through normalized coordinates
// leaves ~1e-16 residue that bleeds neighbouring pixels into what should
// be an exact center hit.
struct BilinearTap {
    std::size_t r0, r1, c0, c1; // clamped neighbour rows/cols
    double fx, fy;              // fractional offsets in [0, 1]
};

inline double snap_px(double p) {
    const double r = std::nearbyint(p);
    return std::fabs(p - r) <= 1e-9 ? r : p;
}

inline BilinearTap bilinear_tap(double px, double py, std::size_t w, std::size_t h) {
    px = snap_px(px);
    py = snap_px(py);
    const double fc = std::floor(px);
    const double fr = std::floor(py);
    BilinearTap t;
    t.fx = px - fc;
    t.fy = py - fr;
    const auto clampi = [](double v, std::size_t n) {
        const double c = std::clamp(v, 0.0, static_cast<double>(n - 1));
        return static_cast<std::size_t>(c);
    };
    t.c0 = clampi(fc, w);
    t.c1 = clampi(fc + 1.0, w);
    t.r0 = clampi(fr, h);
    t.r1 = clampi(fr + 1.0, h);
    return t;
}

// data laid out row-major, channel-interleaved: data[(r*w + c)*ch + k].
inline double bilinear_value(const double* data, std::size_t w, std::size_t ch,
                             const BilinearTap& t, std::size_t k) {
    const double v00 = data[(t.r0 * w + t.c0) * ch + k];
    const double v01 = data[(t.r0 * w + t.c1) * ch + k];
    const double v10 = data[(t.r1 * w + t.c0) * ch + k];
    const double v11 = data[(t.r1 * w + t.c1) * ch + k];
    const double top = v00 + t.fx * (v01 - v00);
    const double bot = v10 + t.fx * (v11 - v10);
    return top + t.fy * (bot - top);
}

// Partial derivatives of the sampled value w.r.t. px and py.
inline void bilinear_deriv(const double* data, std::size_t w, std::size_t ch,
                           const BilinearTap& t, std::size_t k,
                           double& dpx, double& dpy) {
    const double v00 = data[(t.r0 * w + t.c0) * ch + k];
    const double v01 = data[(t.r0 * w + t.c1) * ch + k];
    const double v10 = data[(t.r1 * w + t.c0) * ch + k];
    const double v11 = data[(t.r1 * w + t.c1) * ch + k];
    dpx = (1.0 - t.fy) * (v01 - v00) + t.fy * (v11 - v10);
    dpy = (1.0 - t.fx) * (v10 - v00) + t.fx * (v11 - v01);
}

} // namespace drmime::detail
