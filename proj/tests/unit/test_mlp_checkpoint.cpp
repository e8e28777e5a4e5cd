// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <random>

#include "harness.hpp"
#include "pinpoint/alignment.hpp"
#include "pinpoint/checkpoint.hpp"
#include "pinpoint/errors.hpp"
#include "pinpoint/mlp.hpp"

using namespace pinpoint;

TEST_CASE("mlp forward matches a naive two-layer network") {
    std::mt19937_64 rng(3);
    const MlpParams p = MlpParams::uniform_init(4, 6, 3, rng, Activation::relu);
    MlpParams biased = p;
    biased.b1 = harness::random_tensor({1, 6}, rng);
    biased.b2 = harness::random_tensor({1, 3}, rng);
    const Tensor x = harness::random_tensor({5, 4}, rng);
    const Tensor y = mlp_forward(x, biased);

    auto h = oracle::matmul(harness::to_mat(x), harness::to_mat(biased.w1));
    for (auto& row : h) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = std::max(0.0, row[j] + biased.b1[j]);
        }
    }
    auto out = oracle::matmul(h, harness::to_mat(biased.w2));
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < out[i].size(); ++j) {
            CHECK(y.at(i, j) == doctest::Approx(out[i][j] + biased.b2[j]).epsilon(1e-13));
        }
    }
}

TEST_CASE("mlp tape and plain forward agree bitwise") {
    std::mt19937_64 rng(4);
    const MlpParams p = MlpParams::uniform_init(4, 8, 4, rng);
    const Tensor x = harness::random_tensor({7, 4}, rng);
    ad::Tape tape;
    CHECK(mlp_forward(tape.constant(x), bind_mlp(tape, p)).value() == mlp_forward(x, p));
}

TEST_CASE("mlp rejects a mismatched input width") {
    std::mt19937_64 rng(5);
    const MlpParams p = MlpParams::uniform_init(4, 8, 4, rng);
    CHECK_THROWS_AS(mlp_forward(Tensor({2, 5}), p), DimensionError);
    CHECK_THROWS_AS(parse_activation("swish"), ConfigError);
    CHECK(parse_activation(to_string(Activation::relu)) == Activation::relu);
}

TEST_CASE("checkpoints round-trip bit for bit") {
    const AlignmentModel model = AlignmentModel::init(8, 3, 99);
    const auto path = std::filesystem::temp_directory_path() / "pinpoint_ckpt_roundtrip.json";
    save_checkpoint(path, model.to_checkpoint());
    const AlignmentModel back = AlignmentModel::from_checkpoint(load_checkpoint(path));
    const auto a = model.parameters();
    const auto b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(*a[i] == *b[i]);
    }
    CHECK(back.d_k == model.d_k);
    std::filesystem::remove(path);
}

TEST_CASE("awkward doubles survive serialization") {
    const Tensor t = Tensor::vector({0.1, 1.0 / 3.0, -2.2250738585072014e-308, 1e300, 5e-324});
    CHECK(tensor_from_json(nlohmann::json::parse(tensor_to_json(t).dump())) == t);
}

TEST_CASE("malformed checkpoints raise ParseError") {
    CHECK_THROWS_AS(checkpoint_from_json(nlohmann::json::object()), ParseError);
    nlohmann::json doc = checkpoint_to_json(Checkpoint{});
    doc["version"] = 99;
    CHECK_THROWS_AS(checkpoint_from_json(doc), ParseError);
    CHECK_THROWS_AS(tensor_from_json(nlohmann::json{{"shape", {2, 2}}, {"data", {1.0}}}), ParseError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), ParseError);
}

TEST_CASE("zero and identity MLPs") {
    std::mt19937_64 rng(8);
    const Tensor x = harness::random_tensor({3, 5}, rng);
    const Tensor zero = mlp_forward(x, MlpParams::zeros(5, 7, 5));
    for (double v : zero.values()) {
        CHECK(v == 0.0);
    }
    Tensor positive = x;
    for (auto& v : positive.data()) {
        v = std::abs(v) + 0.1;
    }
    CHECK(mlp_forward(positive, MlpParams::identity(5, Activation::relu)) == positive);
    CHECK(mlp_forward(x, MlpParams::identity(5, Activation::identity)) == x);
}

TEST_CASE("mlp weight gradients pass a finite-difference check") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        const MlpParams p = MlpParams::uniform_init(4, 6, 3, rng);
        const Tensor x = harness::random_tensor({5, 4}, rng);
        const std::vector<Tensor> inputs{x, p.w1, p.b1, p.w2, p.b2};
        const double err = harness::gradcheck_op(inputs, [](ad::Tape&, const std::vector<ad::Var>& v) {
            return mlp_forward(v[0], MlpVars{v[1], v[2], v[3], v[4], Activation::gelu});
        }, seed);
        CHECK(err < 1e-5);
    }
}
