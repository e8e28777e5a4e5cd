// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pinpoint {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major float64 array. Plain value type: copies are deep.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    /// Builds a 2-D tensor from nested rows; all rows must have equal length.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);
    static Tensor scalar(double value);

    const Shape& shape() const { return m_shape; }
    std::size_t rank() const { return m_shape.size(); }
    std::size_t numel() const { return m_data.size(); }
    bool empty() const { return m_data.empty(); }

    /// Row/column counts of a 2-D tensor; rank-1 tensors are treated as a single row.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<double> data() { return m_data; }
    std::span<const double> data() const { return m_data; }
    const std::vector<double>& values() const { return m_data; }

    double& operator[](std::size_t i) { return m_data[i]; }
    double operator[](std::size_t i) const { return m_data[i]; }

    double& at(std::size_t r, std::size_t c) { return m_data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return m_data[r * cols() + c]; }

    std::span<double> row(std::size_t r);
    std::span<const double> row(std::size_t r) const;

    /// Scalar value of a one-element tensor.
    double item() const;

    /// Same data, new shape; element count must match.
    Tensor reshaped(Shape shape) const;

    bool all_finite() const;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape m_shape;
    std::vector<double> m_data;
};

// Plain (non-recording) kernels. The autodiff tape calls these for its forward pass,
// so evaluation-only code paths and training paths share identical arithmetic.

Tensor matmul(const Tensor& a, const Tensor& b);
/// a · bᵀ without materializing the transpose.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
/// aᵀ · b without materializing the transpose.
Tensor matmul_lhs_transposed(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& x);

/// softmax_rows(q · kvᵀ · scale) · kv
Tensor sdp_attention(const Tensor& q, const Tensor& kv, double scale);
/// softmax_rows(q · kᵀ · scale) · v with separate keys and values.
Tensor sdp_attention_values(const Tensor& q, const Tensor& k, const Tensor& v, double scale);

/// Exact GELU, x · Φ(x).
double gelu(double x);
double gelu_derivative(double x);

/// dot(a,b)/(|a||b|); 0 when either norm is below 1e-12.
double cosine(std::span<const double> a, std::span<const double> b);

inline constexpr double kDegenerateNorm = 1e-12;

/// Copies the listed rows of a 2-D tensor into a new (indices.size() × cols) tensor.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);

}  // namespace pinpoint
