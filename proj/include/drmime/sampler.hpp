#pragma once

#include <cstddef>
#include <vector>

#include "drmime/image.hpp"
#include "drmime/rng.hpp"

namespace drmime {

// Pixel locations on one pyramid level that feed the estimator batch.
struct SampleSet {
    std::size_t level = 1;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;

    std::size_t size() const { return rows.size(); }
};

// floor(fraction * h * w) distinct locations, uniform without replacement,
// drawn fresh from the given stream. A zero count (tiny dims) falls back
// to all pixels.
SampleSet random_sample(std::size_t h, std::size_t w, double fraction, Rng& rng);

struct CannyOptions {
    double sigma = 2.0;
    double low_frac = 0.1;   // low threshold = low_frac * max gradient magnitude
    double high_frac = 0.2;  // high threshold = high_frac * max gradient magnitude
    std::size_t cap = 50000; // seeded subsample above this many edge pixels
    double fallback_fraction = 0.1;
    std::size_t min_edges = 64; // below this, fall back to random sampling
};

// Canny edge pixels of the (internally grayscaled) image: Gaussian smooth,
// Sobel 3x3, 4-direction non-maximum suppression, hysteresis with
// thresholds relative to the max gradient magnitude, 8-connected linking.
// Degenerate images (fewer than min_edges edges) fall back to
// random_sample at fallback_fraction; counts above cap are subsampled.
SampleSet canny_sample(const Image& img, const CannyOptions& opt, Rng& rng);

} // namespace drmime
