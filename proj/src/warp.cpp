#include "drmime/warp.hpp"

#include <cmath>

#include "drmime/coords.hpp"
#include "drmime/detail/bilinear.hpp"
#include "drmime/errors.hpp"

namespace drmime::warp {

std::shared_ptr<const ad::Tensor> image_grid(const Image& img) {
    return std::make_shared<ad::Tensor>(
        std::vector<std::size_t>{img.height(), img.width(), img.channels()}, img.data());
}

ad::Var sample(const std::shared_ptr<const ad::Tensor>& grid, ad::Var pts) {
    return ad::bilinear_sample(grid, pts);
}

std::vector<std::size_t> valid_indices(const ad::Tensor& pts) {
    if (pts.rank() != 2 || pts.cols() != 2)
        throw InvalidArgument("valid_indices: pts must be {n,2}");
    std::vector<std::size_t> idx;
    idx.reserve(pts.rows());
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double x = pts.at(i, 0), y = pts.at(i, 1);
        if (x >= -1.0 && x <= 1.0 && y >= -1.0 && y <= 1.0) idx.push_back(i);
    }
    return idx;
}

std::vector<unsigned char> valid_mask(const ad::Tensor& pts) {
    if (pts.rank() != 2 || pts.cols() != 2)
        throw InvalidArgument("valid_mask: pts must be {n,2}");
    std::vector<unsigned char> mask(pts.rows(), 0);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double x = pts.at(i, 0), y = pts.at(i, 1);
        mask[i] = (x >= -1.0 && x <= 1.0 && y >= -1.0 && y <= 1.0) ? 1 : 0;
    }
    return mask;
}

SampleValues sample_values(const Image& img, const std::vector<double>& pts_xy) {
    if (pts_xy.size() % 2 != 0) throw InvalidArgument("sample_values: odd coordinate list");
    const std::size_t n = pts_xy.size() / 2;
    const std::size_t w = img.width(), h = img.height(), ch = img.channels();
    SampleValues out;
    out.values.resize(n * ch);
    out.valid.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = pts_xy[2 * i], y = pts_xy[2 * i + 1];
        if (!std::isfinite(x) || !std::isfinite(y))
            throw NumericalError("sample_values: non-finite point");
        out.valid[i] = (x >= -1.0 && x <= 1.0 && y >= -1.0 && y <= 1.0) ? 1 : 0;
        const detail::BilinearTap tap =
            detail::bilinear_tap(px_from_norm(x, w), px_from_norm(y, h), w, h);
        for (std::size_t k = 0; k < ch; ++k)
            out.values[i * ch + k] = detail::bilinear_value(img.data().data(), w, ch, tap, k);
    }
    return out;
}

Image warp_image(const Image& img, const Mat3& h, std::size_t out_h, std::size_t out_w) {
    if (!h.affine_row()) throw InvalidArgument("warp_image: bottom row must be (0,0,1)");
    if (std::fabs(h.det2()) <= 1e-12) throw NumericalError("warp_image: singular transform");
    const std::size_t w = img.width(), ih = img.height(), ch = img.channels();
    Image out(out_h, out_w, ch);
    for (std::size_t r = 0; r < out_h; ++r) {
        const double y = norm_from_px(static_cast<double>(r), out_h);
        for (std::size_t c = 0; c < out_w; ++c) {
            const double x = norm_from_px(static_cast<double>(c), out_w);
            double qx = 0.0, qy = 0.0;
            h.apply(x, y, qx, qy);
            if (qx < -1.0 || qx > 1.0 || qy < -1.0 || qy > 1.0) continue; // stays 0
            const detail::BilinearTap tap =
                detail::bilinear_tap(px_from_norm(qx, w), px_from_norm(qy, ih), w, ih);
            for (std::size_t k = 0; k < ch; ++k)
                out.at(r, c, k) = detail::bilinear_value(img.data().data(), w, ch, tap, k);
        }
    }
    return out;
}

} // namespace drmime::warp
