#pragma once

#include <cstdint>

#include "drmime/image.hpp"
#include "drmime/landmarks.hpp"
#include "drmime/transform_record.hpp"

namespace drmime {

// Ground-truth affine for synthetic pairs: rotation (degrees), translation
// in normalized units, isotropic scale. Applied about the image center.
struct SynthParams {
    double rot_deg = 0.0;
    double tx = 0.0;
    double ty = 0.0;
    double scale = 1.0;
};

// Exact Lie coefficients whose exponential realizes the requested
// similarity transform: v = (a, b, theta, ln s, 0, 0), where (a,b) solves
// phi(K) (a+ib) = tx+i*ty for K = ln s + i*theta, phi(K) = (e^K - 1)/K.
Coeffs6 synth_coeffs(const SynthParams& p);

struct SynthOutput {
    Image moving;
    LandmarkSet landmarks;
    TransformRecord truth; // fixed -> moving, consistent by construction
};

// Validates |rot| <= 30, |tx|,|ty| <= 0.2, scale in [0.8, 1.25]; resamples
// the fixed image under the inverse truth transform and lays a filtered
// interior grid of landmark pairs (at least 10).
SynthOutput make_synth_pair(const Image& fixed, const SynthParams& p);

// Deterministic textured test image: smooth blobs and gratings plus
// sharp-edged discs and bars (so edge detection has something to find),
// values kept inside [0.02, 0.98].
Image make_test_image(std::size_t h, std::size_t w, std::size_t channels, std::uint64_t seed);

} // namespace drmime
