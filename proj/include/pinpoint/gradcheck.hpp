// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "pinpoint/tensor.hpp"

namespace pinpoint {

/// Central differences of a scalar function with respect to every entry of `param`.
/// `param` is perturbed in place and restored before returning.
Tensor finite_difference_gradient(const std::function<double()>& f, Tensor& param, double h = 1e-5);

/// max|a−b| / max(max|a|, max|b|, floor). The floor keeps all-but-zero gradients from
/// reporting spurious relative blow-ups.
double relative_error(const Tensor& analytic, const Tensor& numeric, double floor = 1e-8);

}  // namespace pinpoint
