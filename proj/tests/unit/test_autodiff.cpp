// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "harness.hpp"
#include "pinpoint/autodiff.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/gradcheck.hpp"

using namespace pinpoint;

TEST_CASE("every op passes a finite-difference check over 20 seeds") {
    for (const auto& op : harness::op_cases()) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed * 7919 + 3);
            worst = std::max(worst, harness::gradcheck_op(op.inputs(rng), op.build, seed));
        }
        INFO(op.name << " worst relative error " << worst);
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("tape forward values match plain kernels bitwise") {
    std::mt19937_64 rng(5);
    const Tensor q = harness::random_tensor({3, 4}, rng);
    const Tensor kv = harness::random_tensor({6, 4}, rng);
    ad::Tape tape;
    CHECK(ad::sdp_attention(tape.leaf(q), tape.leaf(kv), 0.5).value() == sdp_attention(q, kv, 0.5));
    CHECK(ad::matmul_transposed(tape.leaf(q), tape.leaf(kv)).value() == matmul_transposed(q, kv));
    CHECK(ad::softmax_rows(tape.leaf(q)).value() == softmax_rows(q));
}

TEST_CASE("gradients accumulate across reuse of a variable") {
    ad::Tape tape;
    const ad::Var x = tape.leaf(Tensor::vector({1.0, -2.0, 3.0}));
    const ad::Var y = ad::add(ad::sum(ad::mul(x, x)), ad::sum(ad::scale(x, 3.0)));
    tape.backward(y);
    CHECK(x.grad() == Tensor::vector({5.0, -1.0, 9.0}));
}

TEST_CASE("constants receive no gradient") {
    ad::Tape tape;
    const ad::Var c = tape.constant(Tensor::vector({1.0, 2.0}));
    const ad::Var x = tape.leaf(Tensor::vector({3.0, 4.0}));
    tape.backward(ad::sum(ad::mul(c, x)));
    CHECK(x.grad() == Tensor::vector({1.0, 2.0}));
    CHECK_FALSE(tape.requires_grad(c.id));
}

TEST_CASE("mismatched operands are rejected") {
    ad::Tape tape;
    const ad::Var a = tape.leaf(Tensor({2, 3}));
    const ad::Var b = tape.leaf(Tensor({3, 2}));
    CHECK_THROWS_AS(ad::add(a, b), DimensionError);
    CHECK_THROWS_AS(ad::mul(a, b), DimensionError);
    CHECK_THROWS_AS(ad::row_cosine(a, b), DimensionError);
    ad::Tape other;
    const ad::Var c = other.leaf(Tensor({2, 3}));
    CHECK_THROWS_AS(ad::add(a, c), std::invalid_argument);
}

TEST_CASE("library gradcheck helpers agree with the oracle") {
    std::mt19937_64 rng(17);
    Tensor w = harness::random_tensor({3, 3}, rng);
    const auto f = [&] {
        double s = 0.0;
        for (double v : w.values()) {
            s += std::sin(v) * v;
        }
        return s;
    };
    const Tensor g = finite_difference_gradient(f, w);
    const Tensor before = w;
    const auto fo = [&](const oracle::Vec& x) {
        double s = 0.0;
        for (double v : x) {
            s += std::sin(v) * v;
        }
        return s;
    };
    const oracle::Vec go = oracle::fd_gradient(fo, w.values());
    CHECK(w == before);
    CHECK(relative_error(g, Tensor(g.shape(), go)) < 1e-12);
}
