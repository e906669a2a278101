#pragma once

#include <vector>

#include "drmime/image.hpp"

namespace drmime {

// Gaussian multi-resolution stack. Level 1 is the native image; level l+1
// is a blurred, stride-2 decimated copy of level l with dims ceil(n/2).
class Pyramid {
public:
    explicit Pyramid(std::vector<Image> levels) : levels_(std::move(levels)) {}

    std::size_t count() const { return levels_.size(); }
    // 1-based per the level indexing used throughout.
    const Image& level(std::size_t l) const { return levels_.at(l - 1); }

private:
    std::vector<Image> levels_;
};

// Separable 5-tap binomial blur (1,4,6,4,1)/16 per axis, edge-replicated.
Image gaussian_blur(const Image& img);

// Largest L such that the level-L dims are still at least 8x8.
std::size_t max_levels(std::size_t h, std::size_t w);

// Requested L is clamped to max_levels with a warning on stderr.
Pyramid build_pyramid(const Image& img, std::size_t levels);

} // namespace drmime
