// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "pinpoint/autodiff.hpp"
#include "pinpoint/tensor.hpp"

namespace pinpoint {

enum class Activation { gelu, relu, identity };

Activation parse_activation(const std::string& name);
std::string to_string(Activation activation);

/// Two affine layers, x·W1 + b1 → activation → ·W2 + b2. Weights are stored [in × out].
struct MlpParams {
    Tensor w1;
    Tensor b1;
    Tensor w2;
    Tensor b2;
    Activation activation = Activation::gelu;

    std::size_t input_dim() const { return w1.rows(); }
    std::size_t output_dim() const { return w2.cols(); }

    /// Weights uniform in ±1/sqrt(in_dim), zero biases.
    static MlpParams uniform_init(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                                  std::mt19937_64& rng, Activation activation = Activation::gelu);
    static MlpParams zeros(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                           Activation activation = Activation::gelu);
    static MlpParams identity(std::size_t dim, Activation activation);
};

Tensor mlp_forward(const Tensor& x, const MlpParams& params);

/// Tape-side view of an MLP: leaves bound to the parameter tensors.
struct MlpVars {
    ad::Var w1, b1, w2, b2;
    Activation activation = Activation::gelu;
};

MlpVars bind_mlp(ad::Tape& tape, const MlpParams& params, bool trainable = true);
ad::Var mlp_forward(ad::Var x, const MlpVars& vars);

}  // namespace pinpoint
