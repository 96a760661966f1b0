#pragma once

#include <cstdint>
#include <vector>

#include "urbf/tensor.hpp"

namespace urbf {

enum class OpKind {
    Leaf,
    Add,
    Subtract,
    Multiply,
    Divide,
    Negate,
    Exponential,
    Square,
    MatMul,
    Sum,
    Mean,
    Relu,
    BroadcastTo,
    Concatenate,
    Urbf,
    Mrbf,
};

const char* op_kind_name(OpKind kind);

using NodeId = std::size_t;

/// Reverse-mode tape. Nodes are appended in evaluation order, so the
/// sequence is topologically sorted by construction. One graph per
/// forward/backward pass; backward may run only once.
class Graph {
public:
    NodeId leaf(TensorPtr t);
    NodeId leaf(Tensor t) { return leaf(std::make_shared<Tensor>(std::move(t))); }

    NodeId add(NodeId a, NodeId b) { return apply(OpKind::Add, {a, b}); }
    NodeId subtract(NodeId a, NodeId b) { return apply(OpKind::Subtract, {a, b}); }
    NodeId multiply(NodeId a, NodeId b) { return apply(OpKind::Multiply, {a, b}); }
    NodeId divide(NodeId a, NodeId b) { return apply(OpKind::Divide, {a, b}); }
    NodeId negate(NodeId a) { return apply(OpKind::Negate, {a}); }
    NodeId exponential(NodeId a) { return apply(OpKind::Exponential, {a}); }
    NodeId square(NodeId a) { return apply(OpKind::Square, {a}); }
    NodeId matmul(NodeId a, NodeId b) { return apply(OpKind::MatMul, {a, b}); }
    NodeId sum(NodeId a) { return apply(OpKind::Sum, {a}); }
    NodeId mean(NodeId a) { return apply(OpKind::Mean, {a}); }
    NodeId relu(NodeId a) { return apply(OpKind::Relu, {a}); }
    /// Replicates a rank-1 vector [n] into rows of a [rows x n] matrix.
    NodeId broadcast_to(NodeId a, std::size_t rows) {
        return apply(OpKind::BroadcastTo, {a}, rows);
    }
    /// Joins two rank-1 vectors end to end, or two rank-2 matrices
    /// with equal row counts column-wise.
    NodeId concatenate(NodeId a, NodeId b) { return apply(OpKind::Concatenate, {a, b}); }

    /// Per-dimension Gaussian kernel bank: x [B x D], centers [D x K],
    /// spreads [D x K] -> [B x D*K] with out(b, d*K+k) =
    /// exp(-(x(b,d) - c(d,k))^2 / (2 sigma(d,k)^2)).
    NodeId urbf(NodeId x, NodeId centers, NodeId spreads) {
        return apply(OpKind::Urbf, {x, centers, spreads});
    }

    /// Classical RBF layer: x [B x D], centers [K x D], spreads [K],
    /// weights [J x K] -> [B x J], kernels on the Euclidean distance.
    NodeId mrbf(NodeId x, NodeId centers, NodeId spreads, NodeId weights) {
        return apply(OpKind::Mrbf, {x, centers, spreads, weights});
    }

    NodeId apply(OpKind kind, std::vector<NodeId> inputs, std::size_t attr = 0);

    const Tensor& value(NodeId id) const { return *nodes_[id].out; }
    TensorPtr tensor(NodeId id) const { return nodes_[id].out; }
    std::size_t node_count() const { return nodes_.size(); }

    /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse,
    /// accumulating into the grad of every requires_grad leaf tensor.
    void backward(NodeId loss);

private:
    struct Node {
        OpKind kind;
        std::vector<NodeId> inputs;
        TensorPtr out;
        std::size_t attr = 0;
    };

    Tensor eval(OpKind kind, const std::vector<NodeId>& inputs, std::size_t attr) const;

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace urbf
