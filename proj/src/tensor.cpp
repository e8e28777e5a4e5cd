// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "pinpoint/errors.hpp"

namespace pinpoint {

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "x" : "") << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill) : m_shape(std::move(shape)), m_data(shape_numel(m_shape), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : m_shape(std::move(shape)), m_data(std::move(data)) {
    if (shape_numel(m_shape) != m_data.size()) {
        throw DimensionError("tensor shape " + shape_to_string(m_shape) + " does not match " +
                             std::to_string(m_data.size()) + " values");
    }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n_rows = rows.size();
    const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(n_rows * n_cols);
    for (const auto& r : rows) {
        if (r.size() != n_cols) {
            throw DimensionError("ragged matrix literal");
        }
        data.insert(data.end(), r.begin(), r.end());
    }
    return Tensor({n_rows, n_cols}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::scalar(double value) {
    return Tensor({1}, std::vector<double>{value});
}

std::size_t Tensor::rows() const {
    if (m_shape.size() == 1) {
        return 1;
    }
    if (m_shape.size() != 2) {
        throw DimensionError("expected a 2-D tensor, got " + shape_to_string(m_shape));
    }
    return m_shape[0];
}

std::size_t Tensor::cols() const {
    if (m_shape.size() == 1) {
        return m_shape[0];
    }
    if (m_shape.size() != 2) {
        throw DimensionError("expected a 2-D tensor, got " + shape_to_string(m_shape));
    }
    return m_shape[1];
}

std::span<double> Tensor::row(std::size_t r) {
    const std::size_t c = cols();
    return std::span<double>(m_data).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
    const std::size_t c = cols();
    return std::span<const double>(m_data).subspan(r * c, c);
}

double Tensor::item() const {
    if (m_data.size() != 1) {
        throw DimensionError("item() on tensor of shape " + shape_to_string(m_shape));
    }
    return m_data[0];
}

Tensor Tensor::reshaped(Shape shape) const {
    return Tensor(std::move(shape), m_data);
}

bool Tensor::all_finite() const {
    return std::all_of(m_data.begin(), m_data.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(what) + ": expected a 2-D tensor, got " + shape_to_string(t.shape()));
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul: inner dimensions differ " + shape_to_string(a.shape()) + " · " +
                             shape_to_string(b.shape()));
    }
    Tensor c({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
    return c;
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_transposed");
    require_matrix(b, "matmul_transposed");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw DimensionError("matmul_transposed: feature dimensions differ " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
    Tensor c({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                s += arow[p] * brow[p];
            }
            pc[i * n + j] = s;
        }
    }
    return c;
}

Tensor matmul_lhs_transposed(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_lhs_transposed");
    require_matrix(b, "matmul_lhs_transposed");
    const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul_lhs_transposed: row counts differ " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
    Tensor c({m, n});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* pc = c.data().data();
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = pa + p * m;
        const double* brow = pb + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
    return c;
}

Tensor transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor t({n, m});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            t.at(j, i) = a.at(i, j);
        }
    }
    return t;
}

Tensor softmax_rows(const Tensor& x) {
    require_matrix(x, "softmax_rows");
    Tensor y(x.shape());
    const std::size_t n = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto in = x.row(r);
        auto out = y.row(r);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = std::exp(in[j] - mx);
            sum += out[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            out[j] /= sum;
        }
    }
    return y;
}

Tensor sdp_attention(const Tensor& q, const Tensor& kv, double scale) {
    return sdp_attention_values(q, kv, kv, scale);
}

Tensor sdp_attention_values(const Tensor& q, const Tensor& k, const Tensor& v, double scale) {
    if (q.rank() != 2 || k.rank() != 2 || q.cols() != k.cols()) {
        throw DimensionError("sdp_attention: query " + shape_to_string(q.shape()) + " and key " +
                             shape_to_string(k.shape()) + " disagree on feature dimension");
    }
    Tensor logits = matmul_transposed(q, k);
    for (auto& x : logits.data()) {
        x *= scale;
    }
    return matmul(softmax_rows(logits), v);
}

double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

double gelu_derivative(double x) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    return cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine: vectors of length " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kDegenerateNorm || nb < kDegenerateNorm) {
        return 0.0;
    }
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
    require_matrix(x, "gather_rows");
    const std::size_t d = x.cols();
    Tensor out({indices.size(), d});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= x.rows()) {
            throw BoundsError("gather_rows: row " + std::to_string(indices[i]) + " of " + std::to_string(x.rows()));
        }
        std::copy_n(x.row(indices[i]).begin(), d, out.row(i).begin());
    }
    return out;
}

}  // namespace pinpoint
