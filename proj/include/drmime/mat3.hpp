#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "drmime/errors.hpp"

namespace drmime {

// Small dense 3x3 matrix, row-major. Used for homogeneous 2D affine
// transforms (bottom row (0,0,1)) and as plumbing for the exponential.
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return r;
    }

    double& at(std::size_t r, std::size_t c) { return m[r * 3 + c]; }
    double at(std::size_t r, std::size_t c) const { return m[r * 3 + c]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }

    Mat3 scaled(double s) const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = m[i] * s;
        return r;
    }

    // (x', y') = upper 2x3 block applied to (x, y, 1).
    void apply(double x, double y, double& ox, double& oy) const {
        ox = m[0] * x + m[1] * y + m[2];
        oy = m[3] * x + m[4] * y + m[5];
    }

    double det2() const { return m[0] * m[4] - m[1] * m[3]; }

    bool affine_row() const { return m[6] == 0.0 && m[7] == 0.0 && m[8] == 1.0; }

    // Inverse of an affine matrix (bottom row (0,0,1)).
    Mat3 inverse_affine() const {
        if (!affine_row()) throw InvalidArgument("inverse_affine: bottom row is not (0,0,1)");
        const double d = det2();
        if (std::fabs(d) <= 1e-12) throw NumericalError("inverse_affine: singular transform");
        Mat3 r = identity();
        r.m[0] = m[4] / d;
        r.m[1] = -m[1] / d;
        r.m[3] = -m[3] / d;
        r.m[4] = m[0] / d;
        r.m[2] = -(r.m[0] * m[2] + r.m[1] * m[5]);
        r.m[5] = -(r.m[3] * m[2] + r.m[4] * m[5]);
        return r;
    }

    double max_abs_diff(const Mat3& o) const {
        double d = 0.0;
        for (std::size_t i = 0; i < 9; ++i) d = std::max(d, std::fabs(m[i] - o.m[i]));
        return d;
    }
};

} // namespace drmime
