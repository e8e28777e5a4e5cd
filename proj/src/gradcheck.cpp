// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pinpoint/errors.hpp"

namespace pinpoint {

Tensor finite_difference_gradient(const std::function<double()>& f, Tensor& param, double h) {
    Tensor grad(param.shape());
    for (std::size_t i = 0; i < param.numel(); ++i) {
        const double saved = param[i];
        param[i] = saved + h;
        const double up = f();
        param[i] = saved - h;
        const double down = f();
        param[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double relative_error(const Tensor& analytic, const Tensor& numeric, double floor) {
    if (analytic.numel() != numeric.numel()) {
        throw DimensionError("relative_error: tensors of different size");
    }
    double diff = 0.0, scale = floor;
    for (std::size_t i = 0; i < analytic.numel(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    }
    return diff / scale;
}

}  // namespace pinpoint
