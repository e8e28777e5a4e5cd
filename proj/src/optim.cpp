// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/optim.hpp"

#include <cmath>
#include <string>

#include "pinpoint/errors.hpp"

namespace pinpoint {

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon) {
    if (!(learning_rate >= 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
        !(epsilon > 0.0)) {
        throw ConfigError("invalid Adam hyperparameters");
    }
    m_state.learning_rate = learning_rate;
    m_state.beta1 = beta1;
    m_state.beta2 = beta2;
    m_state.epsilon = epsilon;
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
    if (params.size() != grads.size()) {
        throw DimensionError("adam: " + std::to_string(params.size()) + " parameters but " +
                             std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape() != grads[i].shape()) {
            throw DimensionError("adam: gradient " + shape_to_string(grads[i].shape()) + " for parameter " +
                                 shape_to_string(params[i]->shape()));
        }
        if (!grads[i].all_finite()) {
            throw NumericalError("adam: non-finite gradient for parameter #" + std::to_string(i));
        }
    }
    if (m_state.first_moment.empty()) {
        for (const Tensor* p : params) {
            m_state.first_moment.emplace_back(p->shape());
            m_state.second_moment.emplace_back(p->shape());
        }
    } else if (m_state.first_moment.size() != params.size()) {
        throw DimensionError("adam: parameter list changed between steps");
    }

    ++m_state.step;
    const double b1 = m_state.beta1, b2 = m_state.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(m_state.step));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(m_state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->data();
        auto g = grads[i].data();
        auto m = m_state.first_moment[i].data();
        auto v = m_state.second_moment[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            p[j] -= m_state.learning_rate * m_hat / (std::sqrt(v_hat) + m_state.epsilon);
        }
    }
}

}  // namespace pinpoint
