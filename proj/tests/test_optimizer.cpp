#include "doctest.h"

#include <cmath>
#include <vector>

#include "drmime/errors.hpp"
#include "drmime/optimizer.hpp"
#include "drmime/rng.hpp"

using namespace drmime;
using ad::Tensor;

TEST_CASE("zero gradient leaves parameters untouched") {
    AdamAms opt;
    Tensor p({3}, {1.0, -2.0, 0.5});
    Tensor g({3});
    Tensor before = p;
    opt.step({&p}, {&g}, 0.1);
    CHECK(p.vec() == before.vec());
    CHECK(opt.step_count() == 1);
}

TEST_CASE("first step moves by nearly rate in the gradient sign") {
    // bias correction makes m_hat = g and u_hat = g*g on step one, so the
    // update is rate * g / (|g| + eps) = rate * sign(g) up to eps rounding
    AdamAms opt;
    Tensor p({4}, {0.0, 0.0, 0.0, 0.0});
    Tensor g({4}, {2.0, -0.5, 1e-3, -4.0});
    opt.step({&p}, {&g}, 0.01);
    CHECK(std::fabs(p[0] - 0.01) <= 1e-8);
    CHECK(std::fabs(p[1] + 0.01) <= 1e-7);
    CHECK(std::fabs(p[2] - 0.01) <= 1e-4); // eps matters more for tiny g
    CHECK(std::fabs(p[3] + 0.01) <= 1e-8);
}

TEST_CASE("ascent: positive gradient raises the parameter") {
    AdamAms opt;
    Tensor p({1}, {5.0});
    Tensor g({1}, {3.0});
    opt.step({&p}, {&g}, 0.5);
    CHECK(p[0] > 5.0);
}

TEST_CASE("max second moment never decreases") {
    AdamAms opt;
    Rng rng(17);
    Tensor p({5});
    double prev = 0.0;
    for (int it = 0; it < 100; ++it) {
        Tensor g({5});
        for (std::size_t i = 0; i < 5; ++i) g[i] = rng.normal() * (it < 50 ? 2.0 : 0.01);
        opt.step({&p}, {&g}, 1e-3);
        REQUIRE(opt.max_second_moment().size() == 1);
        double total = 0.0;
        for (std::size_t i = 0; i < 5; ++i) total += opt.max_second_moment()[0][i];
        CHECK(total >= prev - 1e-18);
        prev = total;
    }
    CHECK(opt.step_count() == 100);
}

TEST_CASE("amsgrad clamps the step after the gradients shrink") {
    // feed a large gradient once, then tiny ones; plain Adam would let the
    // denominator decay and the steps grow back, amsgrad keeps it pinned
    AdamAms opt;
    Tensor p({1});
    Tensor big({1}, {10.0});
    opt.step({&p}, {&big}, 1e-3);
    double prev_step = 0.0;
    Tensor tiny({1}, {1e-4});
    for (int it = 0; it < 20; ++it) {
        const double before = p[0];
        opt.step({&p}, {&tiny}, 1e-3);
        const double step = std::fabs(p[0] - before);
        if (it > 0) CHECK(step <= prev_step * 1.001);
        prev_step = step;
    }
    // denominator still remembers the big gradient
    CHECK(prev_step < 1e-3 * 0.5);
}

TEST_CASE("two groups with separate optimizers do not interact") {
    AdamAms a, b;
    Tensor pa({1}), pb({1});
    Tensor ga({1}, {1.0}), gb({1}, {-1.0});
    a.step({&pa}, {&ga}, 0.1);
    b.step({&pb}, {&gb}, 0.2);
    CHECK(pa[0] > 0.0);
    CHECK(pb[0] < 0.0);
    CHECK(std::fabs(std::fabs(pb[0]) - 2.0 * std::fabs(pa[0])) <= 1e-9);
}

TEST_CASE("deterministic: same gradient stream gives identical trajectories") {
    auto run = [] {
        AdamAms opt;
        Rng rng(3);
        Tensor p({4});
        for (int it = 0; it < 50; ++it) {
            Tensor g({4});
            for (std::size_t i = 0; i < 4; ++i) g[i] = rng.normal();
            opt.step({&p}, {&g}, 1e-2);
        }
        return p.vec();
    };
    CHECK(run() == run());
}

TEST_CASE("shape and count mismatches are rejected") {
    AdamAms opt;
    Tensor p({2}), g2({2}), g3({3});
    CHECK_THROWS_AS(opt.step({&p}, {&g3}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(opt.step({&p}, {}, 0.1), InvalidArgument);
    // consistent call works, then a changed shape is caught
    opt.step({&p}, {&g2}, 0.1);
    CHECK_THROWS_AS(opt.step({&p}, {&g3}, 0.1), InvalidArgument);
}

TEST_CASE("non-finite gradients abort the step") {
    AdamAms opt;
    Tensor p({2}, {1.0, 2.0});
    Tensor g({2}, {1.0, std::nan("")});
    CHECK_THROWS_AS(opt.step({&p}, {&g}, 0.1), NumericalError);
    g[1] = INFINITY;
    CHECK_THROWS_AS(opt.step({&p}, {&g}, 0.1), NumericalError);
    CHECK(p[0] == 1.0); // untouched
}

TEST_CASE("quadratic climb: ascent converges to the peak") {
    // maximize -(x-2)^2, gradient -2(x-2)
    AdamAms opt;
    Tensor p({1}, {-1.0});
    for (int it = 0; it < 4000; ++it) {
        Tensor g({1}, {-2.0 * (p[0] - 2.0)});
        opt.step({&p}, {&g}, 1e-2);
    }
    CHECK(std::fabs(p[0] - 2.0) <= 1e-2);
}
