#include "drmime/lie_affine.hpp"

#include <cmath>

#include "drmime/errors.hpp"

namespace drmime {

const std::array<Mat3, 6>& generators() {
    static const std::array<Mat3, 6> g = [] {
        std::array<Mat3, 6> b{};
        b[0].m = {0, 0, 1, 0, 0, 0, 0, 0, 0};  // translate x
        b[1].m = {0, 0, 0, 0, 0, 1, 0, 0, 0};  // translate y
        b[2].m = {0, -1, 0, 1, 0, 0, 0, 0, 0}; // rotate
        b[3].m = {1, 0, 0, 0, 1, 0, 0, 0, 0};  // isotropic scale
        b[4].m = {1, 0, 0, 0, -1, 0, 0, 0, 0}; // stretch
        b[5].m = {0, 1, 0, 1, 0, 0, 0, 0, 0};  // shear mix
        return b;
    }();
    return g;
}

namespace {

Mat3 combine(const Coeffs6& c) {
    Mat3 b{};
    const auto& g = generators();
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t k = 0; k < 9; ++k) b.m[k] += c[i] * g[i].m[k];
    return b;
}

} // namespace

double basis_combination_norm1(const Coeffs6& coeffs) {
    const Mat3 b = combine(coeffs);
    double best = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += std::fabs(b.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

Mat3 mexp(const Coeffs6& coeffs) {
    for (double c : coeffs)
        if (!std::isfinite(c)) throw NumericalError("mexp: non-finite coefficient");
    const Mat3 b = combine(coeffs);
    const Mat3 id = Mat3::identity();
    Mat3 s = id;
    for (int n = 10; n >= 1; --n) s = id + (b * s).scaled(1.0 / n);
    return s;
}

ad::Var mexp(ad::Tape& tape, ad::Var coeffs) {
    const ad::Tensor& cv = tape.value(coeffs);
    if (cv.numel() != 6) throw InvalidArgument("mexp: coefficient variable must have 6 entries");
    ad::Var c61 = ad::reshape(coeffs, {6, 1});

    // Columns of the 9x6 basis matrix are the row-major generator entries,
    // so B = reshape(G * c, {3,3}).
    ad::Tensor gmat({9, 6});
    const auto& g = generators();
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t k = 0; k < 9; ++k) gmat.at(k, i) = g[i].m[k];
    ad::Var b = ad::reshape(ad::matmul(tape.constant(std::move(gmat)), c61), {3, 3});

    ad::Var id = tape.constant(ad::Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
    ad::Var s = id;
    for (int n = 10; n >= 1; --n)
        s = ad::add(id, ad::scalar_mul(ad::matmul(b, s), 1.0 / n));
    return s;
}

Mat3 mexp_oracle(const Coeffs6& coeffs) {
    for (double c : coeffs)
        if (!std::isfinite(c)) throw NumericalError("mexp_oracle: non-finite coefficient");
    Mat3 b = combine(coeffs);

    double norm = basis_combination_norm1(coeffs);
    int k = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++k;
    }
    b = b.scaled(std::ldexp(1.0, -k));

    const Mat3 id = Mat3::identity();
    Mat3 s = id;
    for (int n = 30; n >= 1; --n) s = id + (b * s).scaled(1.0 / n);
    for (int i = 0; i < k; ++i) s = s * s;
    return s;
}

Mat3 compose_params(const LieParams& p, std::size_t level) {
    if (level < 1) throw InvalidArgument("compose_params: level must be >= 1");
    if (level > 1) return mexp(p.v);
    Coeffs6 c{};
    for (std::size_t i = 0; i < 6; ++i) c[i] = p.v[i] + p.v1[i];
    return mexp(c);
}

ad::Var apply(ad::Tape& tape, ad::Var H, ad::Var pts_h) {
    const ad::Tensor& p = tape.value(pts_h);
    if (p.rank() != 2 || p.cols() != 3)
        throw InvalidArgument("apply: points must be homogeneous {n,3}");
    return ad::slice_cols(ad::matmul(pts_h, ad::transpose(H)), 0, 2);
}

} // namespace drmime
