#include "doctest.h"

#include <cmath>
#include <set>
#include <utility>

#include "drmime/errors.hpp"
#include "drmime/rng.hpp"
#include "drmime/sampler.hpp"
#include "drmime/synth.hpp"

using namespace drmime;

namespace {

std::set<std::pair<std::size_t, std::size_t>> as_set(const SampleSet& s) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.insert({s.rows[i], s.cols[i]});
    return out;
}

} // namespace

TEST_CASE("random sample draws floor(frac*h*w) distinct in-bounds points") {
    Rng rng(17);
    SampleSet s = random_sample(100, 100, 0.1, rng);
    CHECK(s.size() == 1000);
    CHECK(as_set(s).size() == 1000); // no repeats
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.rows[i] < 100);
        CHECK(s.cols[i] < 100);
    }
}

TEST_CASE("random sample count floors") {
    Rng rng(1);
    CHECK(random_sample(9, 9, 0.1, rng).size() == 8); // floor(8.1)
}

TEST_CASE("fraction one covers every pixel") {
    Rng rng(2);
    SampleSet s = random_sample(10, 12, 1.0, rng);
    CHECK(s.size() == 120);
    CHECK(as_set(s).size() == 120);
}

TEST_CASE("a count that floors to zero falls back to all pixels") {
    Rng rng(3);
    SampleSet s = random_sample(8, 8, 0.01, rng); // floor(0.64) = 0
    CHECK(s.size() == 64);
}

TEST_CASE("random sampling is deterministic in the stream") {
    Rng a(42), b(42);
    SampleSet sa = random_sample(64, 64, 0.2, a);
    SampleSet sb = random_sample(64, 64, 0.2, b);
    CHECK(sa.rows == sb.rows);
    CHECK(sa.cols == sb.cols);
}

TEST_CASE("bad fractions are rejected") {
    Rng rng(4);
    CHECK_THROWS_AS(random_sample(16, 16, 0.0, rng), InvalidArgument);
    CHECK_THROWS_AS(random_sample(16, 16, 1.5, rng), InvalidArgument);
}

TEST_CASE("canny finds a vertical step edge where it is") {
    Image img(100, 100, 1, 0.1);
    for (std::size_t r = 0; r < 100; ++r)
        for (std::size_t c = 50; c < 100; ++c) img.at(r, c) = 0.9;
    Rng rng(5);
    CannyOptions opt;
    SampleSet s = canny_sample(img, opt, rng);
    REQUIRE(s.size() >= 64);
    // every edge pixel hugs the step at col 49/50 (smoothing widens it a bit)
    const double edge = 49.5;
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(std::fabs(static_cast<double>(s.cols[i]) - edge) <= 1.5);
}

TEST_CASE("canny on a blank image falls back to random sampling") {
    Image img(64, 64, 1, 0.5);
    Rng rng(6);
    CannyOptions opt;
    SampleSet s = canny_sample(img, opt, rng);
    CHECK(s.size() == 409); // floor(0.1 * 64 * 64)
    CHECK(as_set(s).size() == s.size());
}

TEST_CASE("edge counts above the cap are subsampled to the cap") {
    // fine checkerboard: edges everywhere
    Image img(96, 96, 1, 0.0);
    for (std::size_t r = 0; r < 96; ++r)
        for (std::size_t c = 0; c < 96; ++c) img.at(r, c) = ((r / 4 + c / 4) % 2) ? 0.9 : 0.1;
    Rng rng(7);
    CannyOptions opt;
    opt.cap = 100;
    SampleSet s = canny_sample(img, opt, rng);
    CHECK(s.size() == 100);
    CHECK(as_set(s).size() == 100);
}

TEST_CASE("canny results are deterministic and in bounds") {
    Image img = make_test_image(64, 80, 1, 8);
    Rng a(9), b(9);
    CannyOptions opt;
    SampleSet sa = canny_sample(img, opt, a);
    SampleSet sb = canny_sample(img, opt, b);
    CHECK(sa.rows == sb.rows);
    CHECK(sa.cols == sb.cols);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa.rows[i] < 64);
        CHECK(sa.cols[i] < 80);
    }
    CHECK(sa.size() >= 64); // textured image has plenty of edges
}

TEST_CASE("RGB images are grayscaled before edge detection") {
    Image rgb(100, 100, 3, 0.0);
    for (std::size_t r = 0; r < 100; ++r)
        for (std::size_t c = 50; c < 100; ++c) {
            rgb.at(r, c, 0) = 0.9;
            rgb.at(r, c, 1) = 0.9;
            rgb.at(r, c, 2) = 0.9;
        }
    Rng rng(10);
    CannyOptions opt;
    SampleSet s = canny_sample(rgb, opt, rng);
    CHECK(s.size() >= 64);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(std::fabs(static_cast<double>(s.cols[i]) - 49.5) <= 1.5);
}

TEST_CASE("hysteresis keeps weak edges only when linked to strong ones") {
    // strong vertical step plus a faint isolated blob; the blob's gradient
    // sits between the low and high thresholds so it must vanish
    Image img(100, 100, 1, 0.4);
    for (std::size_t r = 0; r < 100; ++r)
        for (std::size_t c = 50; c < 100; ++c) img.at(r, c) = 1.0;
    img.at(10, 10) = 0.45;
    Rng rng(11);
    CannyOptions opt;
    SampleSet s = canny_sample(img, opt, rng);
    REQUIRE(s.size() >= 64);
    for (std::size_t i = 0; i < s.size(); ++i) {
        INFO("row ", s.rows[i], " col ", s.cols[i]);
        CHECK(s.cols[i] >= 46);
    }
}
