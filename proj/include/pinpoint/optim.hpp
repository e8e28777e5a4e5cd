// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pinpoint/tensor.hpp"

namespace pinpoint {

struct OptimState {
    double learning_rate = 2e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
};

/// Bias-corrected Adam over a fixed, ordered list of parameter tensors.
class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

    /// Updates `params` in place. Throws NumericalError on a non-finite gradient, leaving
    /// parameters and moments untouched.
    void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

    const OptimState& state() const { return m_state; }

private:
    OptimState m_state;
};

}  // namespace pinpoint
