// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/mlp.hpp"

#include <cmath>

#include "pinpoint/errors.hpp"

namespace pinpoint {

Activation parse_activation(const std::string& name) {
    if (name == "gelu") {
        return Activation::gelu;
    }
    if (name == "relu") {
        return Activation::relu;
    }
    if (name == "identity") {
        return Activation::identity;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation activation) {
    switch (activation) {
    case Activation::gelu:
        return "gelu";
    case Activation::relu:
        return "relu";
    case Activation::identity:
        return "identity";
    }
    return "gelu";
}

namespace {

Tensor uniform_tensor(Shape shape, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = dist(rng);
    }
    return t;
}

void add_bias(Tensor& x, const Tensor& bias) {
    const std::size_t n = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] += bias[j];
        }
    }
}

void check_shapes(std::size_t x_cols, const MlpParams& p) {
    if (p.w1.rank() != 2 || p.w2.rank() != 2 || x_cols != p.w1.rows() || p.w1.cols() != p.w2.rows() ||
        p.b1.numel() != p.w1.cols() || p.b2.numel() != p.w2.cols()) {
        throw DimensionError("mlp: input width " + std::to_string(x_cols) + " with W1 " +
                             shape_to_string(p.w1.shape()) + ", W2 " + shape_to_string(p.w2.shape()));
    }
}

}  // namespace

MlpParams MlpParams::uniform_init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                                  std::mt19937_64& rng, Activation activation) {
    MlpParams p;
    p.w1 = uniform_tensor({in_dim, hidden_dim}, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
    p.b1 = Tensor({1, hidden_dim});
    p.w2 = uniform_tensor({hidden_dim, out_dim}, 1.0 / std::sqrt(static_cast<double>(hidden_dim)), rng);
    p.b2 = Tensor({1, out_dim});
    p.activation = activation;
    return p;
}

MlpParams MlpParams::zeros(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                           Activation activation) {
    return MlpParams{Tensor({in_dim, hidden_dim}), Tensor({1, hidden_dim}), Tensor({hidden_dim, out_dim}),
                     Tensor({1, out_dim}), activation};
}

MlpParams MlpParams::identity(std::size_t dim, Activation activation) {
    MlpParams p = zeros(dim, dim, dim, activation);
    for (std::size_t i = 0; i < dim; ++i) {
        p.w1.at(i, i) = 1.0;
        p.w2.at(i, i) = 1.0;
    }
    return p;
}

Tensor mlp_forward(const Tensor& x, const MlpParams& params) {
    check_shapes(x.cols(), params);
    Tensor h = matmul(x, params.w1);
    add_bias(h, params.b1);
    switch (params.activation) {
    case Activation::gelu:
        for (auto& v : h.data()) {
            v = gelu(v);
        }
        break;
    case Activation::relu:
        for (auto& v : h.data()) {
            v = v > 0.0 ? v : 0.0;
        }
        break;
    case Activation::identity:
        break;
    }
    Tensor y = matmul(h, params.w2);
    add_bias(y, params.b2);
    return y;
}

MlpVars bind_mlp(ad::Tape& tape, const MlpParams& params, bool trainable) {
    return MlpVars{tape.leaf(params.w1, trainable), tape.leaf(params.b1, trainable), tape.leaf(params.w2, trainable),
                   tape.leaf(params.b2, trainable), params.activation};
}

ad::Var mlp_forward(ad::Var x, const MlpVars& vars) {
    if (x.value().rank() != 2 || x.value().cols() != vars.w1.value().rows()) {
        throw DimensionError("mlp: input " + shape_to_string(x.shape()) + " with W1 " +
                             shape_to_string(vars.w1.shape()));
    }
    ad::Var h = ad::add_row_bias(ad::matmul(x, vars.w1), vars.b1);
    switch (vars.activation) {
    case Activation::gelu:
        h = ad::gelu(h);
        break;
    case Activation::relu:
        h = ad::relu(h);
        break;
    case Activation::identity:
        break;
    }
    return ad::add_row_bias(ad::matmul(h, vars.w2), vars.b2);
}

}  // namespace pinpoint
