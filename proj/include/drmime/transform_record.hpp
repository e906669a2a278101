#pragma once

#include <string>

#include "drmime/lie_affine.hpp"
#include "drmime/mat3.hpp"

namespace drmime {

// Serialized result of a registration: the final finest-level matrix plus
// the Lie coefficients that produced it and the image dims it applies to.
// Matrix and coefficients must stay consistent: matrix = mexp(v + v1) to
// 1e-12 (enforced on write, re-checked at 1e-9 on read).
//
// parameterization is "mexp" for the standard path. The direct-matrix
// ablation has no Lie coefficients, so it writes zeros for v/v1, tags the
// record "direct", and the consistency check is skipped.
struct TransformRecord {
    Mat3 matrix = Mat3::identity();
    Coeffs6 v{};
    Coeffs6 v1{};
    std::string coord_space = "normalized";
    std::size_t fixed_h = 0, fixed_w = 0;
    std::size_t moving_h = 0, moving_w = 0;
    std::string parameterization = "mexp";
};

// Builds a consistent record from Lie parameters (matrix = mexp(v+v1)).
TransformRecord make_record(const LieParams& p, std::size_t fixed_h, std::size_t fixed_w,
                            std::size_t moving_h, std::size_t moving_w);

// Builds a direct-parameterization record from an explicit matrix.
TransformRecord make_direct_record(const Mat3& h, std::size_t fixed_h, std::size_t fixed_w,
                                   std::size_t moving_h, std::size_t moving_w);

void write_transform(const std::string& path, const TransformRecord& rec);
TransformRecord read_transform(const std::string& path);

} // namespace drmime
