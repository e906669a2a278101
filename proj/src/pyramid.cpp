#include "drmime/pyramid.hpp"

#include <algorithm>
#include <cstdio>

#include "drmime/errors.hpp"

namespace drmime {

namespace {

constexpr double kTap[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

std::size_t clamp_idx(long i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(n - 1)));
}

} // namespace

Image gaussian_blur(const Image& img) {
    const std::size_t h = img.height(), w = img.width(), ch = img.channels();
    std::vector<double> tmp(img.data().size());
    // horizontal
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t k = 0; k < ch; ++k) {
                double s = 0.0;
                for (int t = -2; t <= 2; ++t)
                    s += kTap[t + 2] * img.at(r, clamp_idx(static_cast<long>(c) + t, w), k);
                tmp[(r * w + c) * ch + k] = s;
            }
    // vertical
    std::vector<double> out(img.data().size());
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t k = 0; k < ch; ++k) {
                double s = 0.0;
                for (int t = -2; t <= 2; ++t)
                    s += kTap[t + 2] * tmp[(clamp_idx(static_cast<long>(r) + t, h) * w + c) * ch + k];
                out[(r * w + c) * ch + k] = s;
            }
    // convex weights keep values inside [0,1], but guard against a stray
    // ulp excursion at the boundaries before the Image ctor validates
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
    return Image(h, w, ch, std::move(out));
}

std::size_t max_levels(std::size_t h, std::size_t w) {
    std::size_t l = 1;
    while (true) {
        h = (h + 1) / 2;
        w = (w + 1) / 2;
        if (h < 8 || w < 8) break;
        ++l;
    }
    return l;
}

Pyramid build_pyramid(const Image& img, std::size_t levels) {
    if (levels < 1) throw InvalidArgument("build_pyramid: need at least one level");
    const std::size_t feasible = max_levels(img.height(), img.width());
    if (levels > feasible) {
        std::fprintf(stderr, "warning: clamping pyramid levels %zu -> %zu (level dims must stay >= 8x8)\n",
                     levels, feasible);
        levels = feasible;
    }
    std::vector<Image> out;
    out.reserve(levels);
    out.push_back(img);
    for (std::size_t l = 1; l < levels; ++l) {
        const Image blurred = gaussian_blur(out.back());
        const std::size_t oh = (blurred.height() + 1) / 2;
        const std::size_t ow = (blurred.width() + 1) / 2;
        Image next(oh, ow, blurred.channels());
        for (std::size_t r = 0; r < oh; ++r)
            for (std::size_t c = 0; c < ow; ++c)
                for (std::size_t k = 0; k < blurred.channels(); ++k)
                    next.at(r, c, k) = blurred.at(2 * r, 2 * c, k);
        out.push_back(std::move(next));
    }
    return Pyramid(std::move(out));
}

} // namespace drmime
