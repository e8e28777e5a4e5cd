// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "harness.hpp"
#include "oracles.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/tensor.hpp"

using namespace pinpoint;
using harness::to_mat;
using harness::to_tensor;

namespace {

double max_abs_diff(const oracle::Mat& a, const oracle::Mat& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            d = std::max(d, std::abs(a[i][j] - b[i][j]));
        }
    }
    return d;
}

}  // namespace

TEST_CASE("tensor construction checks the element count") {
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
    CHECK_THROWS_AS(Tensor::matrix({{1, 2}, {3}}), DimensionError);
    const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.at(1, 2) == 6.0);
    CHECK(Tensor::scalar(2.5).item() == 2.5);
    CHECK_THROWS_AS(m.item(), DimensionError);
    CHECK(Tensor::vector({1, 2}).rows() == 1);
    CHECK_THROWS_AS(Tensor({2, 2, 2}).rows(), DimensionError);
}

TEST_CASE("kernels agree with naive references") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = oracle::random_mat(4, 7, rng);
        const auto b = oracle::random_mat(7, 5, rng);
        const auto c = oracle::random_mat(6, 7, rng);
        CHECK(max_abs_diff(to_mat(matmul(to_tensor(a), to_tensor(b))), oracle::matmul(a, b)) < 1e-12);
        CHECK(max_abs_diff(to_mat(matmul_transposed(to_tensor(a), to_tensor(c))),
                           oracle::matmul(a, oracle::transpose(c))) < 1e-12);
        CHECK(max_abs_diff(to_mat(matmul_lhs_transposed(to_tensor(a), to_tensor(a))),
                           oracle::matmul(oracle::transpose(a), a)) < 1e-12);
        CHECK(max_abs_diff(to_mat(softmax_rows(to_tensor(a))), oracle::softmax_rows(a)) < 1e-14);
        CHECK(max_abs_diff(to_mat(sdp_attention(to_tensor(a), to_tensor(c), 1.0 / std::sqrt(7.0))),
                           oracle::attention(a, c, 1.0 / std::sqrt(7.0))) < 1e-12);
        CHECK(cosine(a[0], a[1]) == doctest::Approx(oracle::cosine(a[0], a[1])).epsilon(1e-13));
    }
}

TEST_CASE("softmax survives large logits") {
    const Tensor y = softmax_rows(Tensor::matrix({{1000.0, 1000.0, -1000.0}}));
    CHECK(y.all_finite());
    CHECK(y.at(0, 0) == doctest::Approx(0.5));
    CHECK(y.at(0, 2) == 0.0);
}

TEST_CASE("shape mismatches raise DimensionError") {
    const Tensor a({2, 3});
    const Tensor b({2, 3});
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
    CHECK_THROWS_AS(matmul_transposed(a, Tensor({2, 4})), DimensionError);
    CHECK_THROWS_AS(sdp_attention(a, Tensor({5, 4}), 1.0), DimensionError);
    const std::vector<double> u{1, 2}, v{1, 2, 3};
    CHECK_THROWS_AS(cosine(u, v), DimensionError);
}

TEST_CASE("cosine of a zero vector is zero") {
    const std::vector<double> z{0, 0, 0}, v{1, 2, 3};
    CHECK(cosine(z, v) == 0.0);
}

TEST_CASE("gather_rows copies and bounds-checks") {
    const Tensor x = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<std::size_t> idx{2, 0, 2};
    const Tensor g = gather_rows(x, idx);
    CHECK(g == Tensor::matrix({{5, 6}, {1, 2}, {5, 6}}));
    const std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(gather_rows(x, bad), BoundsError);
}

TEST_CASE("transpose and reshape") {
    const Tensor x = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    CHECK(transpose(transpose(x)) == x);
    CHECK(transpose(x).at(2, 1) == 6.0);
    CHECK(x.reshaped({3, 2}).at(2, 1) == 6.0);
    CHECK_THROWS_AS(x.reshaped({4, 2}), DimensionError);
}

TEST_CASE("gelu derivative matches differences") {
    for (double x = -4.0; x <= 4.0; x += 0.37) {
        const double fd = (gelu(x + 1e-6) - gelu(x - 1e-6)) / 2e-6;
        CHECK(gelu_derivative(x) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("hand-checked kernel values") {
    CHECK(matmul(Tensor::matrix({{1, 0}, {0, 1}}), Tensor::matrix({{3, 4}, {5, 6}})) == Tensor::matrix({{3, 4}, {5, 6}}));
    CHECK(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})) == Tensor::matrix({{11}}));

    const Tensor u = softmax_rows(Tensor::matrix({{0, 0, 0}}));
    for (double v : u.values()) {
        CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    const Tensor r = softmax_rows(Tensor::matrix({{std::log(1.0), std::log(2.0), std::log(3.0)}}));
    CHECK(r[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
    CHECK(r[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-14));
    const Tensor big = softmax_rows(Tensor::matrix({{1000, 0}}));
    CHECK(std::abs(big[0] - 1.0) < 1e-12);
    CHECK(std::abs(big[1]) < 1e-12);

    const std::vector<double> a{1, 2, 3}, x{1, 0}, y{0, 1}, d{1, 1};
    CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine(x, y) == 0.0);
    CHECK(std::abs(cosine(d, x) - 0.7071067811865476) < 1e-9);
}

TEST_CASE("attention special cases") {
    std::mt19937_64 rng(21);
    const Tensor q = harness::random_tensor({4, 3}, rng);
    const Tensor kv = harness::random_tensor({1, 3}, rng);
    const Tensor out = sdp_attention(q, kv, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(out.at(i, j) == doctest::Approx(kv.at(0, j)).epsilon(1e-15));
        }
    }
    const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
    const Tensor sharp = sdp_attention(eye, eye, 50.0);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(sharp.at(i, j) - eye.at(i, j)) < 1e-20 + 2.0 * std::exp(-50.0));
        }
    }
}
