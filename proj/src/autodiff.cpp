// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#include "pinpoint/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "pinpoint/errors.hpp"

namespace pinpoint::ad {

const Tensor& Var::value() const {
    return tape->value(id);
}

const Tensor& Var::grad() const {
    return tape->grad(id);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    m_nodes.push_back(std::move(node));
    return Var{this, m_nodes.size() - 1};
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](std::size_t i) {
        return m_nodes[i].requires_grad;
    });
    if (node.requires_grad) {
        node.backward = std::move(fn);
    }
    node.inputs = std::move(inputs);
    m_nodes.push_back(std::move(node));
    return Var{this, m_nodes.size() - 1};
}

const Tensor& Tape::grad(std::size_t id) const {
    const Node& node = m_nodes[id];
    if (!node.has_grad) {
        // Lazily materialize zeros so callers can always read a correctly shaped buffer.
        auto& mutable_node = const_cast<Node&>(node);
        mutable_node.grad = Tensor(node.value.shape());
        mutable_node.has_grad = true;
    }
    return node.grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
    Node& node = m_nodes[id];
    if (!node.has_grad) {
        node.grad = Tensor(node.value.shape());
        node.has_grad = true;
    }
    return node.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
    if (!m_nodes[id].requires_grad) {
        return;
    }
    Tensor& buf = grad_buffer(id);
    if (buf.numel() != g.numel()) {
        throw DimensionError("gradient of shape " + shape_to_string(g.shape()) + " for node of shape " +
                             shape_to_string(buf.shape()));
    }
    auto dst = buf.data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

void Tape::backward(Var root) {
    if (root.value().numel() != 1) {
        throw DimensionError("backward() without a seed needs a one-element root, got " +
                             shape_to_string(root.shape()));
    }
    backward(root, Tensor(root.shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
    if (root.tape != this) {
        throw std::invalid_argument("backward: root belongs to another tape");
    }
    accumulate(root.id, seed);
    for (std::size_t id = root.id + 1; id-- > 0;) {
        Node& node = m_nodes[id];
        if (node.backward && node.has_grad) {
            node.backward(*this, id);
        }
    }
}

void Tape::zero_grad() {
    for (auto& node : m_nodes) {
        node.grad = Tensor();
        node.has_grad = false;
    }
}

namespace {

Tape& same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) {
        throw std::invalid_argument("operands live on different tapes");
    }
    return *a.tape;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                             shape_to_string(b.shape()) + " differ");
    }
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    Tensor out = pinpoint::matmul(a.value(), b.value());
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(a)) {
            t.accumulate(a, matmul_transposed(g, t.value(b)));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, matmul_lhs_transposed(t.value(a), g));
        }
    });
}

Var matmul_transposed(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    Tensor out = pinpoint::matmul_transposed(a.value(), b.value());
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(a)) {
            t.accumulate(a, pinpoint::matmul(g, t.value(b)));
        }
        if (t.requires_grad(b)) {
            t.accumulate(b, matmul_lhs_transposed(g, t.value(a)));
        }
    });
}

Var add(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape(a.value(), b.value(), "add");
    Tensor out = a.value();
    auto src = b.value().data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        t.accumulate(a, g);
        t.accumulate(b, g);
    });
}

Var sub(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape(a.value(), b.value(), "sub");
    Tensor out = a.value();
    auto src = b.value().data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] -= src[i];
    }
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        t.accumulate(a, g);
        if (t.requires_grad(b)) {
            Tensor neg = g;
            for (auto& v : neg.data()) {
                v = -v;
            }
            t.accumulate(b, neg);
        }
    });
}

Var mul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape(a.value(), b.value(), "mul");
    Tensor out = a.value();
    auto src = b.value().data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] *= src[i];
    }
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(a)) {
            Tensor ga = g;
            auto bv = t.value(b).data();
            for (std::size_t i = 0; i < ga.numel(); ++i) {
                ga[i] *= bv[i];
            }
            t.accumulate(a, ga);
        }
        if (t.requires_grad(b)) {
            Tensor gb = g;
            auto av = t.value(a).data();
            for (std::size_t i = 0; i < gb.numel(); ++i) {
                gb[i] *= av[i];
            }
            t.accumulate(b, gb);
        }
    });
}

Var scale(Var a, double factor) {
    Tensor out = a.value();
    for (auto& v : out.data()) {
        v *= factor;
    }
    return a.tape->record(std::move(out), {a.id}, [a = a.id, factor](Tape& t, std::size_t self) {
        Tensor g = t.grad(self);
        for (auto& v : g.data()) {
            v *= factor;
        }
        t.accumulate(a, g);
    });
}

Var add_row_bias(Var x, Var bias) {
    Tape& tape = same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    if (xv.rank() != 2 || bv.numel() != xv.cols()) {
        throw DimensionError("add_row_bias: bias " + shape_to_string(bv.shape()) + " for input " +
                             shape_to_string(xv.shape()));
    }
    Tensor out = xv;
    const std::size_t n = xv.cols();
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] += bv[j];
        }
    }
    return tape.record(std::move(out), {x.id, bias.id}, [x = x.id, b = bias.id](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        t.accumulate(x, g);
        if (t.requires_grad(b)) {
            Tensor gb(t.value(b).shape());
            const std::size_t n = g.cols();
            for (std::size_t r = 0; r < g.rows(); ++r) {
                auto row = g.row(r);
                for (std::size_t j = 0; j < n; ++j) {
                    gb[j] += row[j];
                }
            }
            t.accumulate(b, gb);
        }
    });
}

Var gelu(Var x) {
    Tensor out = x.value();
    for (auto& v : out.data()) {
        v = pinpoint::gelu(v);
    }
    return x.tape->record(std::move(out), {x.id}, [x = x.id](Tape& t, std::size_t self) {
        Tensor g = t.grad(self);
        auto xv = t.value(x).data();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            g[i] *= gelu_derivative(xv[i]);
        }
        t.accumulate(x, g);
    });
}

Var relu(Var x) {
    Tensor out = x.value();
    for (auto& v : out.data()) {
        v = v > 0.0 ? v : 0.0;
    }
    return x.tape->record(std::move(out), {x.id}, [x = x.id](Tape& t, std::size_t self) {
        Tensor g = t.grad(self);
        auto xv = t.value(x).data();
        for (std::size_t i = 0; i < g.numel(); ++i) {
            if (xv[i] <= 0.0) {
                g[i] = 0.0;
            }
        }
        t.accumulate(x, g);
    });
}

Var softmax_rows(Var x) {
    Tensor out = pinpoint::softmax_rows(x.value());
    return x.tape->record(std::move(out), {x.id}, [x = x.id](Tape& t, std::size_t self) {
        const Tensor& y = t.value(self);
        const Tensor& g = t.grad(self);
        Tensor gx(y.shape());
        const std::size_t n = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
            auto yr = y.row(r);
            auto gr = g.row(r);
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                dot += yr[j] * gr[j];
            }
            auto out = gx.row(r);
            for (std::size_t j = 0; j < n; ++j) {
                out[j] = yr[j] * (gr[j] - dot);
            }
        }
        t.accumulate(x, gx);
    });
}

Var gather_rows(Var x, std::vector<std::size_t> indices) {
    Tensor out = pinpoint::gather_rows(x.value(), indices);
    return x.tape->record(std::move(out), {x.id}, [x = x.id, idx = std::move(indices)](Tape& t, std::size_t self) {
        if (!t.requires_grad(x)) {
            return;
        }
        const Tensor& g = t.grad(self);
        Tensor& gx = t.grad_buffer(x);
        const std::size_t d = g.cols();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = g.row(i);
            auto dst = gx.row(idx[i]);
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] += src[j];
            }
        }
    });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data()) {
        s += v;
    }
    return x.tape->record(Tensor::scalar(s), {x.id}, [x = x.id](Tape& t, std::size_t self) {
        t.accumulate(x, Tensor(t.value(x).shape(), t.grad(self).item()));
    });
}

Var mean(Var x) {
    const double n = static_cast<double>(x.value().numel());
    if (n == 0) {
        throw DimensionError("mean of an empty tensor");
    }
    return scale(sum(x), 1.0 / n);
}

namespace {

struct RowCosine {
    double value;
    double norm_a;
    double norm_b;
    bool degenerate;
};

RowCosine row_cosine_parts(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kDegenerateNorm || nb < kDegenerateNorm) {
        return {0.0, na, nb, true};
    }
    return {std::clamp(dot / (na * nb), -1.0, 1.0), na, nb, false};
}

// d cos / d a = b/(|a||b|) − cos · a/|a|², and symmetrically for b.
void cosine_backward(std::span<const double> a, std::span<const double> b, const RowCosine& c, double upstream,
                     std::span<double> ga, std::span<double> gb) {
    if (c.degenerate) {
        return;
    }
    const double inv = 1.0 / (c.norm_a * c.norm_b);
    const double ka = c.value / (c.norm_a * c.norm_a);
    const double kb = c.value / (c.norm_b * c.norm_b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ga[i] += upstream * (b[i] * inv - ka * a[i]);
        gb[i] += upstream * (a[i] * inv - kb * b[i]);
    }
}

}  // namespace

Var row_cosine(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape(a.value(), b.value(), "row_cosine");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    Tensor out({av.rows()});
    for (std::size_t r = 0; r < av.rows(); ++r) {
        out[r] = row_cosine_parts(av.row(r), bv.row(r)).value;
    }
    return tape.record(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        const Tensor& g = t.grad(self);
        Tensor ga(av.shape());
        Tensor gb(bv.shape());
        for (std::size_t r = 0; r < av.rows(); ++r) {
            const RowCosine c = row_cosine_parts(av.row(r), bv.row(r));
            cosine_backward(av.row(r), bv.row(r), c, g[r], ga.row(r), gb.row(r));
        }
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Var flat_cosine(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape(a.value(), b.value(), "flat_cosine");
    const double value = row_cosine_parts(a.value().data(), b.value().data()).value;
    return tape.record(Tensor::scalar(value), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::size_t self) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        Tensor ga(av.shape());
        Tensor gb(bv.shape());
        const RowCosine c = row_cosine_parts(av.data(), bv.data());
        cosine_backward(av.data(), bv.data(), c, t.grad(self).item(), ga.data(), gb.data());
        t.accumulate(a, ga);
        t.accumulate(b, gb);
    });
}

Var concat(std::span<const Var> scalars) {
    if (scalars.empty()) {
        throw DimensionError("concat of zero elements");
    }
    Tape& tape = *scalars.front().tape;
    Tensor out({scalars.size()});
    std::vector<std::size_t> ids;
    ids.reserve(scalars.size());
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (scalars[i].tape != &tape) {
            throw std::invalid_argument("concat: operands live on different tapes");
        }
        out[i] = scalars[i].value().item();
        ids.push_back(scalars[i].id);
    }
    std::vector<std::size_t> inputs = ids;
    return tape.record(std::move(out), std::move(inputs), [ids = std::move(ids)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            t.accumulate(ids[i], Tensor::scalar(g[i]));
        }
    });
}

Var logsumexp(Var v) {
    const auto data = v.value().data();
    if (data.empty()) {
        throw DimensionError("logsumexp of an empty tensor");
    }
    const double mx = *std::max_element(data.begin(), data.end());
    double s = 0.0;
    for (double x : data) {
        s += std::exp(x - mx);
    }
    return v.tape->record(Tensor::scalar(mx + std::log(s)), {v.id}, [v = v.id](Tape& t, std::size_t self) {
        const double lse = t.value(self).item();
        const double g = t.grad(self).item();
        Tensor gv(t.value(v).shape());
        auto in = t.value(v).data();
        for (std::size_t i = 0; i < in.size(); ++i) {
            gv[i] = g * std::exp(in[i] - lse);
        }
        t.accumulate(v, gv);
    });
}

Var element(Var v, std::size_t index) {
    if (index >= v.value().numel()) {
        throw BoundsError("element " + std::to_string(index) + " of " + shape_to_string(v.shape()));
    }
    return v.tape->record(Tensor::scalar(v.value()[index]), {v.id}, [v = v.id, index](Tape& t, std::size_t self) {
        if (!t.requires_grad(v)) {
            return;
        }
        t.grad_buffer(v)[index] += t.grad(self).item();
    });
}

Var sdp_attention(Var q, Var kv, double scale_factor) {
    if (q.value().rank() != 2 || kv.value().rank() != 2 || q.value().cols() != kv.value().cols()) {
        throw DimensionError("sdp_attention: query " + shape_to_string(q.shape()) + " and key/value " +
                             shape_to_string(kv.shape()) + " disagree on feature dimension");
    }
    Var weights = softmax_rows(scale(matmul_transposed(q, kv), scale_factor));
    return matmul(weights, kv);
}

}  // namespace pinpoint::ad
