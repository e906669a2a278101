#include "doctest.h"

#include <cmath>
#include <vector>

#include "drmime/coords.hpp"
#include "drmime/errors.hpp"
#include "drmime/lie_affine.hpp"
#include "drmime/pyramid.hpp"
#include "drmime/synth.hpp"
#include "drmime/warp.hpp"

using namespace drmime;

namespace {

ad::Tensor points_px(const std::vector<std::pair<double, double>>& rc, std::size_t h,
                     std::size_t w) {
    ad::Tensor pts({rc.size(), 2});
    for (std::size_t i = 0; i < rc.size(); ++i) {
        pts.at(i, 0) = norm_from_px(rc[i].second, w); // x from column
        pts.at(i, 1) = norm_from_px(rc[i].first, h);  // y from row
    }
    return pts;
}

} // namespace

TEST_CASE("sampling at pixel centers returns stored values exactly") {
    Image img = make_test_image(16, 24, 1, 6);
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    std::vector<std::pair<double, double>> rc = {{0, 0}, {3, 7}, {15, 23}, {8, 11}};
    ad::Var out = warp::sample(grid, tape.constant(points_px(rc, 16, 24)));
    const ad::Tensor& v = tape.value(out);
    for (std::size_t i = 0; i < rc.size(); ++i)
        CHECK(v.at(i, 0) == img.at(static_cast<std::size_t>(rc[i].first),
                                   static_cast<std::size_t>(rc[i].second)));
}

TEST_CASE("midpoint between two pixels averages them") {
    Image img(8, 8, 1, 0.0);
    img.at(4, 3) = 0.2;
    img.at(4, 4) = 0.6;
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    ad::Tensor pts({1, 2});
    pts.at(0, 0) = norm_from_px(3.5, 8);
    pts.at(0, 1) = norm_from_px(4.0, 8);
    ad::Var out = warp::sample(grid, tape.constant(std::move(pts)));
    CHECK(tape.value(out)[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("bilinear reproduces a linear ramp inside the pixel hull") {
    // img(r,c) = (2c + 3r + 5) scaled into [0,1]; bilinear interpolation of
    // a plane is exact wherever no clamping happens.
    const std::size_t H = 12, W = 10;
    Image img(H, W, 1, 0.0);
    const double denom = 2.0 * (W - 1) + 3.0 * (H - 1) + 5.0;
    for (std::size_t r = 0; r < H; ++r)
        for (std::size_t c = 0; c < W; ++c)
            img.at(r, c) = (2.0 * c + 3.0 * r + 5.0) / (denom + 1.0);
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    std::vector<std::pair<double, double>> rc = {
        {0.25, 0.75}, {5.5, 4.25}, {10.9, 8.1}, {3.0, 6.5}};
    ad::Var out = warp::sample(grid, tape.constant(points_px(rc, H, W)));
    for (std::size_t i = 0; i < rc.size(); ++i) {
        const double expect = (2.0 * rc[i].second + 3.0 * rc[i].first + 5.0) / (denom + 1.0);
        CHECK(std::fabs(tape.value(out).at(i, 0) - expect) <= 1e-12);
    }
}

TEST_CASE("validity is exactly the [-1,1] box") {
    ad::Tensor pts({5, 2});
    double vals[5][2] = {{0.0, 0.0}, {-1.0, 1.0}, {1.0000001, 0.0}, {0.0, -1.1}, {0.99, -0.99}};
    for (std::size_t i = 0; i < 5; ++i) {
        pts.at(i, 0) = vals[i][0];
        pts.at(i, 1) = vals[i][1];
    }
    std::vector<unsigned char> mask = warp::valid_mask(pts);
    CHECK(mask == std::vector<unsigned char>{1, 1, 0, 0, 1});
    std::vector<std::size_t> idx = warp::valid_indices(pts);
    CHECK(idx == std::vector<std::size_t>{0, 1, 4});
}

TEST_CASE("gradient through sampling matches the local slope") {
    Image img(8, 8, 1, 0.0);
    // column ramp: value = c / 16
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) img.at(r, c) = c / 16.0;
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    ad::Tensor pts({1, 2});
    pts.at(0, 0) = norm_from_px(3.5, 8);
    pts.at(0, 1) = norm_from_px(4.0, 8);
    ad::Var pv = tape.input(std::move(pts), true);
    ad::Var out = warp::sample(grid, pv);
    tape.backward(ad::sum(out));
    // d value / d x_norm = (1/16 per pixel) * (4 pixels per unit x)
    CHECK(tape.grad(pv).at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(tape.grad(pv).at(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant image has zero spatial gradient") {
    Image img(8, 8, 1, 0.5);
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    ad::Tensor pts({2, 2});
    pts.at(0, 0) = 0.1;
    pts.at(0, 1) = -0.3;
    pts.at(1, 0) = norm_from_px(2.25, 8);
    pts.at(1, 1) = norm_from_px(5.5, 8);
    ad::Var pv = tape.input(std::move(pts), true);
    tape.backward(ad::sum(warp::sample(grid, pv)));
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.grad(pv)[i] == 0.0);
}

TEST_CASE("warp_image under the identity copies the image") {
    Image img = make_test_image(24, 16, 1, 9);
    Image out = warp::warp_image(img, Mat3::identity(), 24, 16);
    CHECK(out.data() == img.data());
}

TEST_CASE("one-pixel shift moves columns and zeroes the exposed edge") {
    Image img = make_test_image(16, 16, 1, 10);
    Mat3 h = Mat3::identity();
    h.at(0, 2) = 2.0 / 16.0; // +1 pixel in x for W=16
    Image out = warp::warp_image(img, h, 16, 16);
    // out(r,c) = img(r, c+1) where defined
    for (std::size_t r = 0; r < 16; ++r) {
        for (std::size_t c = 0; c + 1 < 16; ++c) CHECK(out.at(r, c) == img.at(r, c + 1));
        CHECK(out.at(r, 15) == 0.0);
    }
}

TEST_CASE("rotate there and back nearly recovers the interior") {
    // smooth texture: double-resampling error scales with curvature, so
    // knock the hard disc edges down first
    Image img = gaussian_blur(gaussian_blur(gaussian_blur(make_test_image(64, 64, 1, 12))));
    Coeffs6 c{};
    c[2] = 10.0 * M_PI / 180.0;
    Mat3 fwd = mexp_oracle(c);
    Mat3 bwd = fwd.inverse_affine();
    Image once = warp::warp_image(img, fwd, 64, 64);
    Image twice = warp::warp_image(once, bwd, 64, 64);
    double worst = 0.0;
    for (std::size_t r = 20; r < 44; ++r)
        for (std::size_t cidx = 20; cidx < 44; ++cidx)
            worst = std::max(worst, std::fabs(twice.at(r, cidx) - img.at(r, cidx)));
    CHECK(worst <= 0.02);
}

TEST_CASE("plain sample_values matches the tape op bit for bit") {
    Image img = make_test_image(16, 16, 3, 13);
    auto grid = warp::image_grid(img);
    std::vector<double> pts_xy = {0.1,  -0.2, norm_from_px(3.3, 16),
                                  0.77, -1.5, 0.0}; // last point invalid
    ad::Tensor pts({3, 2}, std::vector<double>(pts_xy));
    ad::Tape tape;
    ad::Var out = warp::sample(grid, tape.constant(pts));
    warp::SampleValues sv = warp::sample_values(img, pts_xy);
    REQUIRE(sv.values.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(sv.values[i] == tape.value(out)[i]);
    CHECK(sv.valid == std::vector<unsigned char>{1, 1, 0});
}

TEST_CASE("singular transform is rejected") {
    Image img = make_test_image(16, 16, 1, 14);
    Mat3 h{};
    h.at(2, 2) = 1.0; // zero affine block
    CHECK_THROWS_AS(warp::warp_image(img, h, 16, 16), NumericalError);
}

TEST_CASE("point sets must be {n,2}") {
    Image img = make_test_image(8, 8, 1, 15);
    auto grid = warp::image_grid(img);
    ad::Tape tape;
    CHECK_THROWS_AS(warp::sample(grid, tape.constant(ad::Tensor({3}, {1, 2, 3}))),
                    InvalidArgument);
}
