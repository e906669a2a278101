#pragma once

#include <memory>
#include <vector>

#include "drmime/image.hpp"
#include "drmime/mat3.hpp"
#include "drmime/tape.hpp"

namespace drmime::warp {

// Copies an image into the {h,w,ch} grid tensor the differentiable sampler
// consumes. Shared so one copy serves every per-iteration tape.
std::shared_ptr<const ad::Tensor> image_grid(const Image& img);

// Differentiable bilinear lookup at normalized points pts {n,2} (rows =
// (x,y)). Values are edge-clamped; validity is judged separately.
ad::Var sample(const std::shared_ptr<const ad::Tensor>& grid, ad::Var pts);

// valid <=> both coords within [-1,1].
std::vector<std::size_t> valid_indices(const ad::Tensor& pts);
std::vector<unsigned char> valid_mask(const ad::Tensor& pts);

// Plain (non-tape) sampling for evaluation paths; same tap arithmetic.
// Returns per-point channel values; invalid points still produce clamped
// values, flagged by the mask.
struct SampleValues {
    std::vector<double> values; // n * channels, row-major
    std::vector<unsigned char> valid;
};
SampleValues sample_values(const Image& img, const std::vector<double>& pts_xy);

// Inverse-mapped full-image warp: for every output pixel center p
// (normalized in the output frame), out(p) = img(H*p), with out-of-range
// samples written as 0. H maps the output (fixed) frame into img's frame.
Image warp_image(const Image& img, const Mat3& h, std::size_t out_h, std::size_t out_w);

} // namespace drmime::warp
