// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pinpoint/tensor.hpp"

namespace pinpoint::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Tensor& grad() const;
    const Shape& shape() const { return value().shape(); }
};

/// Append-only record of a forward computation. Node ids are assigned in creation order, so
/// every op's inputs precede it and reverse id order is a valid topological order.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    /// Records an op output. `fn` is kept only when some input requires a gradient.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

    const Tensor& value(std::size_t id) const { return m_nodes[id].value; }
    /// Gradient accumulated so far; a zero tensor of the node's shape if nothing reached it.
    const Tensor& grad(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return m_nodes[id].requires_grad; }
    std::size_t size() const { return m_nodes.size(); }

    /// Adds `g` into the gradient buffer of `id` (no-op for nodes that do not require grad).
    void accumulate(std::size_t id, const Tensor& g);
    Tensor& grad_buffer(std::size_t id);

    /// Seeds d(root)=1 for a one-element root and runs the reverse sweep.
    void backward(Var root);
    /// Seeds an arbitrary upstream gradient of the root's shape.
    void backward(Var root, const Tensor& seed);

    void zero_grad();

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
        bool has_grad = false;
    };

    std::vector<Node> m_nodes;
};

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_transposed(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// x[n×m] + bias broadcast over rows; bias is [m] or [1×m].
Var add_row_bias(Var x, Var bias);
Var gelu(Var x);
Var relu(Var x);
Var softmax_rows(Var x);
Var gather_rows(Var x, std::vector<std::size_t> indices);
Var sum(Var x);
Var mean(Var x);
/// Per-row cosine of two equally shaped matrices, returned as a [rows] vector.
Var row_cosine(Var a, Var b);
/// Cosine of the two operands flattened to vectors, returned as [1].
Var flat_cosine(Var a, Var b);
/// Stacks one-element nodes into a [n] vector.
Var concat(std::span<const Var> scalars);
Var logsumexp(Var v);
Var element(Var v, std::size_t index);
/// softmax_rows(q·kvᵀ·scale)·kv
Var sdp_attention(Var q, Var kv, double scale);

}  // namespace pinpoint::ad
