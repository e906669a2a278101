#include "doctest.h"

#include <cmath>
#include <vector>

#include "drmime/errors.hpp"
#include "drmime/gradcheck.hpp"
#include "drmime/tape.hpp"

using namespace drmime;
using namespace drmime::ad;

TEST_CASE("scalar square: value and gradient") {
    Tape tape;
    Var v = tape.input(Tensor::scalar(3.0), true);
    Var y = mul(v, v);
    CHECK(tape.value(y)[0] == 9.0);
    tape.backward(y);
    CHECK(tape.grad(v)[0] == 6.0);
}

TEST_CASE("sum of squares gradient is 2x") {
    Tape tape;
    Var x = tape.input(Tensor({3}, {1.0, 2.0, 3.0}), true);
    Var y = sum(mul(x, x));
    CHECK(tape.value(y)[0] == 14.0);
    tape.backward(y);
    const Tensor& g = tape.grad(x);
    CHECK(g[0] == 2.0);
    CHECK(g[1] == 4.0);
    CHECK(g[2] == 6.0);
}

TEST_CASE("mean gradient is 1/n") {
    Tape tape;
    Var x = tape.input(Tensor({4}, {1.0, 2.0, 3.0, 4.0}), true);
    Var y = mean(x);
    CHECK(tape.value(y)[0] == doctest::Approx(2.5).epsilon(1e-15));
    tape.backward(y);
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.grad(x)[i] == 0.25);
}

TEST_CASE("matmul against identity leaves values and routes gradient") {
    Tape tape;
    Var a = tape.input(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}), true);
    Var eye = tape.constant(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}));
    Var y = matmul(a, eye);
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.value(y)[i] == tape.value(a)[i]);
    tape.backward(sum(y));
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.grad(a)[i] == 1.0);
}

TEST_CASE("matmul small hand case") {
    Tape tape;
    Var a = tape.constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    Var b = tape.constant(Tensor({3, 2}, {7, 8, 9, 10, 11, 12}));
    Var y = matmul(a, b);
    const Tensor& v = tape.value(y);
    CHECK(v.at(0, 0) == 58.0);
    CHECK(v.at(0, 1) == 64.0);
    CHECK(v.at(1, 0) == 139.0);
    CHECK(v.at(1, 1) == 154.0);
}

TEST_CASE("relu forward and subgradient at zero") {
    Tape tape;
    Var x = tape.input(Tensor({3}, {-1.0, 0.0, 2.0}), true);
    Var y = relu(x);
    CHECK(tape.value(y)[0] == 0.0);
    CHECK(tape.value(y)[1] == 0.0);
    CHECK(tape.value(y)[2] == 2.0);
    tape.backward(sum(y));
    CHECK(tape.grad(x)[0] == 0.0);
    CHECK(tape.grad(x)[1] == 0.0); // relu'(0) defined as 0
    CHECK(tape.grad(x)[2] == 1.0);
}

TEST_CASE("exp, log, sqrt round-trip values") {
    Tape tape;
    Var x = tape.constant(Tensor({2}, {0.25, 4.0}));
    CHECK(tape.value(ad::exp(ad::log(x)))[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(tape.value(ad::sqrt(x))[1] == 2.0);
}

TEST_CASE("max_reduce takes the first maximizer on ties") {
    Tape tape;
    Var x = tape.input(Tensor({4}, {1.0, 5.0, 5.0, 2.0}), true);
    Var y = max_reduce(x);
    CHECK(tape.value(y)[0] == 5.0);
    tape.backward(y);
    CHECK(tape.grad(x)[0] == 0.0);
    CHECK(tape.grad(x)[1] == 1.0);
    CHECK(tape.grad(x)[2] == 0.0);
    CHECK(tape.grad(x)[3] == 0.0);
}

TEST_CASE("gather_rows with repeats scatter-adds the gradient") {
    Tape tape;
    Var x = tape.input(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}), true);
    Var y = gather_rows(x, {2, 0, 2});
    const Tensor& v = tape.value(y);
    CHECK(v.at(0, 0) == 5.0);
    CHECK(v.at(1, 0) == 1.0);
    CHECK(v.at(2, 1) == 6.0);
    tape.backward(sum(y));
    const Tensor& g = tape.grad(x);
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(1, 0) == 0.0);
    CHECK(g.at(2, 0) == 2.0); // row 2 gathered twice
}

TEST_CASE("concat_cols then slice_cols recovers each part") {
    Tape tape;
    Var a = tape.input(Tensor({2, 2}, {1, 2, 3, 4}), true);
    Var b = tape.input(Tensor({2, 1}, {9, 8}), true);
    Var cat = concat_cols(a, b);
    CHECK(tape.value(cat).shape() == std::vector<std::size_t>{2, 3});
    Var left = slice_cols(cat, 0, 2);
    Var right = slice_cols(cat, 2, 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(tape.value(left)[i] == tape.value(a)[i]);
    for (std::size_t i = 0; i < 2; ++i) CHECK(tape.value(right)[i] == tape.value(b)[i]);
    tape.backward(sum(right));
    CHECK(tape.grad(a)[0] == 0.0);
    CHECK(tape.grad(b)[0] == 1.0);
}

TEST_CASE("add_rowvec broadcasts and sums the bias gradient over rows") {
    Tape tape;
    Var a = tape.constant(Tensor({3, 2}, {0, 0, 0, 0, 0, 0}));
    Var b = tape.input(Tensor({2}, {1.0, -2.0}), true);
    Var y = add_rowvec(a, b);
    CHECK(tape.value(y).at(2, 1) == -2.0);
    tape.backward(sum(y));
    CHECK(tape.grad(b)[0] == 3.0);
    CHECK(tape.grad(b)[1] == 3.0);
}

TEST_CASE("transpose and reshape move values without copying semantics surprises") {
    Tape tape;
    Var a = tape.input(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}), true);
    Var t = transpose(a);
    CHECK(tape.value(t).shape() == std::vector<std::size_t>{3, 2});
    CHECK(tape.value(t).at(2, 1) == 6.0);
    Var r = reshape(a, {3, 2});
    CHECK(tape.value(r).at(2, 1) == 6.0);
    tape.backward(sum(mul(t, t)));
    CHECK(tape.grad(a).at(1, 2) == 12.0);
}

TEST_CASE("gradient is linear in the root") {
    // d(2f)/dx == 2 df/dx, checked through two separate tapes.
    Tensor x0({3}, {0.3, -0.7, 1.1});
    auto run = [&](double c) {
        Tape tape;
        Var x = tape.input(x0, true);
        Var y = scalar_mul(sum(mul(x, ad::exp(x))), c);
        tape.backward(y);
        return tape.grad(x);
    };
    Tensor g1 = run(1.0);
    Tensor g2 = run(2.0);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::fabs(g2[i] - 2.0 * g1[i]) <= 1e-12 * std::fabs(g1[i]));
}

TEST_CASE("replaying the same graph twice is bit-identical") {
    auto run = [] {
        Tape tape;
        Var x = tape.input(Tensor({4}, {0.1, 0.2, 0.3, 0.4}), true);
        Var y = sum(mul(relu(x), ad::exp(x)));
        tape.backward(y);
        std::vector<double> out = tape.grad(x).vec();
        out.push_back(tape.value(y)[0]);
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("inputs unrelated to the root get zero gradients") {
    Tape tape;
    Var x = tape.input(Tensor::scalar(2.0), true);
    Var z = tape.input(Tensor({2}, {1.0, 1.0}), true);
    Var y = mul(x, x);
    tape.backward(y);
    CHECK(tape.grad(z)[0] == 0.0);
    CHECK(tape.grad(z)[1] == 0.0);
}

TEST_CASE("shape mismatches and bad ops throw InvalidArgument") {
    Tape tape;
    Var a = tape.constant(Tensor({2}, {1, 2}));
    Var b = tape.constant(Tensor({3}, {1, 2, 3}));
    CHECK_THROWS_AS(add(a, b), InvalidArgument);
    Var m = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
    Var n = tape.constant(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
    CHECK_THROWS_AS(matmul(m, n), InvalidArgument);
    CHECK_THROWS_AS(gather_rows(m, {0, 2}), InvalidArgument);
    CHECK_THROWS_AS(reshape(m, {3, 2}), InvalidArgument);
    CHECK_THROWS_AS(slice_cols(m, 1, 3), InvalidArgument);
}

TEST_CASE("backward requires a scalar root") {
    Tape tape;
    Var a = tape.input(Tensor({2}, {1, 2}), true);
    CHECK_THROWS_AS(tape.backward(a), InvalidArgument);
}

TEST_CASE("pushing ops after backward throws") {
    Tape tape;
    Var x = tape.input(Tensor::scalar(1.0), true);
    Var y = mul(x, x);
    tape.backward(y);
    CHECK_THROWS_AS(mul(x, x), InvalidArgument);
}

TEST_CASE("non-finite results are rejected at the op that makes them") {
    Tape tape;
    Var neg = tape.constant(Tensor({1}, {-1.0}));
    CHECK_THROWS_AS(ad::log(neg), NumericalError);
    Var zero = tape.constant(Tensor({1}, {0.0}));
    Var one = tape.constant(Tensor({1}, {1.0}));
    CHECK_THROWS_AS(div(one, zero), NumericalError);
    CHECK_THROWS_AS(ad::sqrt(neg), NumericalError);
    Var big = tape.constant(Tensor({1}, {1e308}));
    CHECK_THROWS_AS(ad::exp(big), NumericalError);
}

TEST_CASE("finite-difference audit of every differentiable op") {
    const std::vector<GradCheckReport> reports = run_gradcheck(17);
    CHECK(reports.size() >= 20);
    for (const auto& r : reports) {
        INFO(r.name, " max_rel_err=", r.max_rel_err, " tol=", r.tol);
        CHECK(r.pass);
        CHECK(r.max_rel_err < r.tol);
    }
}
