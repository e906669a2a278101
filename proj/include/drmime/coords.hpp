#pragma once

#include <cstddef>

namespace drmime {

// Normalized coordinate convention used everywhere: a pixel center at
// column c of an axis with n pixels sits at 2*(c + 0.5)/n - 1, so the
// image interior maps onto [-1, 1] on both axes independently.

inline double norm_from_px(double px, std::size_t n) {
    return (2.0 * px + 1.0) / static_cast<double>(n) - 1.0;
}

inline double px_from_norm(double x, std::size_t n) {
    return (x + 1.0) * 0.5 * static_cast<double>(n) - 0.5;
}

} // namespace drmime
