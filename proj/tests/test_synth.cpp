#include "doctest.h"

#include <cmath>

#include "drmime/errors.hpp"
#include "drmime/lie_affine.hpp"
#include "drmime/synth.hpp"

using namespace drmime;

TEST_CASE("identity parameters give zero coefficients") {
    SynthParams p;
    Coeffs6 c = synth_coeffs(p);
    for (double x : c) CHECK(x == 0.0);
}

TEST_CASE("pure translation coefficients are the translation itself") {
    SynthParams p;
    p.tx = 0.05;
    p.ty = -0.08;
    Coeffs6 c = synth_coeffs(p);
    CHECK(c[0] == 0.05);
    CHECK(c[1] == -0.08);
    CHECK(c[2] == 0.0);
    CHECK(c[3] == 0.0);
    Mat3 h = mexp(c);
    CHECK(h.at(0, 2) == 0.05);
    CHECK(h.at(1, 2) == -0.08);
    CHECK(h.at(0, 0) == 1.0);
}

TEST_CASE("coefficients exponentiate to the requested similarity") {
    SynthParams p;
    p.rot_deg = 5.0;
    p.tx = 0.05;
    p.ty = -0.03;
    p.scale = 1.03;
    Mat3 h = mexp(synth_coeffs(p));
    const double th = 5.0 * M_PI / 180.0;
    CHECK(std::fabs(h.at(0, 0) - 1.03 * std::cos(th)) <= 1e-9);
    CHECK(std::fabs(h.at(0, 1) + 1.03 * std::sin(th)) <= 1e-9);
    CHECK(std::fabs(h.at(1, 0) - 1.03 * std::sin(th)) <= 1e-9);
    CHECK(std::fabs(h.at(1, 1) - 1.03 * std::cos(th)) <= 1e-9);
    CHECK(std::fabs(h.at(0, 2) - 0.05) <= 1e-9);
    CHECK(std::fabs(h.at(1, 2) + 0.03) <= 1e-9);
}

TEST_CASE("synthetic pair carries a consistent truth record") {
    Image fixed = make_test_image(64, 64, 1, 17);
    SynthParams p;
    p.rot_deg = 5.0;
    p.tx = 0.05;
    p.scale = 1.03;
    SynthOutput out = make_synth_pair(fixed, p);
    CHECK(out.moving.height() == 64);
    CHECK(out.moving.width() == 64);
    CHECK(out.truth.fixed_h == 64);
    CHECK(out.truth.moving_w == 64);
    CHECK(out.truth.parameterization == "mexp");
    // matrix really is mexp of the stored coefficients
    Coeffs6 total{};
    for (std::size_t i = 0; i < 6; ++i) total[i] = out.truth.v[i] + out.truth.v1[i];
    CHECK(out.truth.matrix.max_abs_diff(mexp(total)) <= 1e-12);
}

TEST_CASE("landmarks map exactly through the truth transform") {
    Image fixed = make_test_image(64, 64, 1, 18);
    SynthParams p;
    p.tx = 0.05; // x only
    SynthOutput out = make_synth_pair(fixed, p);
    REQUIRE(out.landmarks.size() >= 10);
    // normalized shift of 0.05 on the [-1,1] axis is 0.05*W/2 pixels
    for (const auto& m : out.landmarks) {
        CHECK(std::fabs((m.x_moving - m.x_fixed) - 0.05 * 32.0) <= 1e-9);
        CHECK(std::fabs(m.y_moving - m.y_fixed) <= 1e-9);
    }
}

TEST_CASE("landmarks stay inside both images") {
    Image fixed = make_test_image(96, 64, 1, 19);
    SynthParams p;
    p.rot_deg = 20.0;
    p.tx = 0.15;
    p.ty = -0.1;
    p.scale = 1.2;
    SynthOutput out = make_synth_pair(fixed, p);
    REQUIRE(out.landmarks.size() >= 10);
    for (const auto& m : out.landmarks) {
        CHECK(m.x_fixed >= 0.0);
        CHECK(m.x_fixed <= 63.0);
        CHECK(m.y_fixed >= 0.0);
        CHECK(m.y_fixed <= 95.0);
        CHECK(m.x_moving >= 0.0);
        CHECK(m.x_moving <= 63.0);
        CHECK(m.y_moving >= 0.0);
        CHECK(m.y_moving <= 95.0);
    }
}

TEST_CASE("identity parameters reproduce the fixed image bit for bit") {
    Image fixed = make_test_image(48, 48, 1, 20);
    SynthOutput out = make_synth_pair(fixed, SynthParams{});
    CHECK(out.moving.data() == fixed.data());
}

TEST_CASE("parameter bounds are enforced") {
    Image fixed = make_test_image(32, 32, 1, 21);
    SynthParams p;
    p.rot_deg = 31.0;
    CHECK_THROWS_AS(make_synth_pair(fixed, p), InvalidArgument);
    p = SynthParams{};
    p.tx = 0.25;
    CHECK_THROWS_AS(make_synth_pair(fixed, p), InvalidArgument);
    p = SynthParams{};
    p.scale = 0.5;
    CHECK_THROWS_AS(make_synth_pair(fixed, p), InvalidArgument);
    p = SynthParams{};
    p.scale = 1.3;
    CHECK_THROWS_AS(make_synth_pair(fixed, p), InvalidArgument);
}

TEST_CASE("test image generator is deterministic, bounded, per-channel") {
    Image a = make_test_image(64, 48, 1, 22);
    Image b = make_test_image(64, 48, 1, 22);
    CHECK(a.data() == b.data());
    Image c = make_test_image(64, 48, 1, 23);
    CHECK(a.data() != c.data());
    for (double v : a.data()) {
        CHECK(v >= 0.02);
        CHECK(v <= 0.98);
    }
    Image rgb = make_test_image(32, 32, 3, 22);
    CHECK(rgb.channels() == 3);
    rgb.validate_range();
}
