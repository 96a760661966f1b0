#include "urbf/graph.hpp"

#include <cmath>
#include <string>

namespace urbf {

namespace {

[[noreturn]] void shape_error(OpKind kind, const Tensor& a) {
    throw ContractError(std::string(op_kind_name(kind)) + ": unsupported shape " +
                        shape_to_string(a.shape()));
}

[[noreturn]] void shape_error(OpKind kind, const Tensor& a, const Tensor& b) {
    throw ContractError(std::string(op_kind_name(kind)) + ": shape mismatch " +
                        shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

void require_same_shape(OpKind kind, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) shape_error(kind, a, b);
}

double gauss(double u, double v) {
    return std::exp(-(u * u) / (2.0 * v * v));
}

}  // namespace

const char* op_kind_name(OpKind kind) {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::Add: return "add";
        case OpKind::Subtract: return "subtract";
        case OpKind::Multiply: return "multiply";
        case OpKind::Divide: return "divide";
        case OpKind::Negate: return "negate";
        case OpKind::Exponential: return "exponential";
        case OpKind::Square: return "square";
        case OpKind::MatMul: return "matrix_multiply";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::Relu: return "relu";
        case OpKind::BroadcastTo: return "broadcast_to";
        case OpKind::Concatenate: return "concatenate";
        case OpKind::Urbf: return "urbf";
        case OpKind::Mrbf: return "mrbf";
    }
    return "?";
}

NodeId Graph::leaf(TensorPtr t) {
    if (!t) throw ContractError("Graph::leaf: null tensor");
    nodes_.push_back(Node{OpKind::Leaf, {}, std::move(t), 0});
    return nodes_.size() - 1;
}

NodeId Graph::apply(OpKind kind, std::vector<NodeId> inputs, std::size_t attr) {
    for (NodeId id : inputs) {
        if (id >= nodes_.size()) throw ContractError("Graph::apply: input node out of range");
    }
    Tensor out = eval(kind, inputs, attr);
    if (!out.all_finite()) {
        throw ContractError(std::string(op_kind_name(kind)) + ": non-finite output");
    }
    nodes_.push_back(Node{kind, std::move(inputs), std::make_shared<Tensor>(std::move(out)), attr});
    return nodes_.size() - 1;
}

Tensor Graph::eval(OpKind kind, const std::vector<NodeId>& inputs, std::size_t attr) const {
    auto in = [&](std::size_t i) -> const Tensor& { return *nodes_[inputs[i]].out; };

    switch (kind) {
        case OpKind::Leaf:
            throw ContractError("Graph::apply: use leaf() for leaves");

        case OpKind::Add:
        case OpKind::Subtract:
        case OpKind::Multiply: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            require_same_shape(kind, a, b);
            Tensor out(a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) {
                double x = a[i], y = b[i];
                out[i] = kind == OpKind::Add ? x + y
                       : kind == OpKind::Subtract ? x - y
                       : x * y;
            }
            return out;
        }

        case OpKind::Divide: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            require_same_shape(kind, a, b);
            Tensor out(a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (b[i] == 0.0) throw ContractError("divide: zero element in divisor");
                out[i] = a[i] / b[i];
            }
            return out;
        }

        case OpKind::Negate:
        case OpKind::Exponential:
        case OpKind::Square:
        case OpKind::Relu: {
            const Tensor& a = in(0);
            Tensor out(a.shape());
            for (std::size_t i = 0; i < a.size(); ++i) {
                double x = a[i];
                out[i] = kind == OpKind::Negate ? -x
                       : kind == OpKind::Exponential ? std::exp(x)
                       : kind == OpKind::Square ? x * x
                       : (x > 0.0 ? x : 0.0);
            }
            return out;
        }

        case OpKind::MatMul: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
                shape_error(kind, a, b);
            }
            const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
            Tensor out({m, n});
            const double* pa = a.values().data();
            const double* pb = b.values().data();
            double* pc = out.values().data();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = pa[i * k + p];
                    const double* brow = pb + p * n;
                    double* crow = pc + i * n;
                    for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
                }
            }
            return out;
        }

        case OpKind::Sum:
        case OpKind::Mean: {
            const Tensor& a = in(0);
            double s = 0.0;
            for (double v : a.values()) s += v;
            if (kind == OpKind::Mean) s /= static_cast<double>(a.size());
            return Tensor::scalar(s);
        }

        case OpKind::BroadcastTo: {
            const Tensor& a = in(0);
            if (a.rank() != 1) shape_error(kind, a);
            if (attr == 0) throw ContractError("broadcast_to: row count must be positive");
            const std::size_t n = a.size();
            Tensor out({attr, n});
            for (std::size_t r = 0; r < attr; ++r) {
                for (std::size_t j = 0; j < n; ++j) out[r * n + j] = a[j];
            }
            return out;
        }

        case OpKind::Concatenate: {
            const Tensor& a = in(0);
            const Tensor& b = in(1);
            if (a.rank() == 1 && b.rank() == 1) {
                std::vector<double> v = a.values();
                v.insert(v.end(), b.values().begin(), b.values().end());
                return Tensor::from({v.size()}, std::move(v));
            }
            if (a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows()) {
                const std::size_t m = a.rows(), ca = a.cols(), cb = b.cols();
                Tensor out({m, ca + cb});
                for (std::size_t r = 0; r < m; ++r) {
                    for (std::size_t j = 0; j < ca; ++j) out.at(r, j) = a.at(r, j);
                    for (std::size_t j = 0; j < cb; ++j) out.at(r, ca + j) = b.at(r, j);
                }
                return out;
            }
            shape_error(kind, a, b);
        }

        case OpKind::Urbf: {
            const Tensor& x = in(0);
            const Tensor& c = in(1);
            const Tensor& s = in(2);
            if (x.rank() != 2 || c.rank() != 2 || s.rank() != 2 ||
                x.cols() != c.rows() || c.shape() != s.shape()) {
                shape_error(kind, x, c);
            }
            const std::size_t batch = x.rows(), dims = x.cols(), kk = c.cols();
            Tensor out({batch, dims * kk});
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t d = 0; d < dims; ++d) {
                    const double xv = x.at(b, d);
                    for (std::size_t k = 0; k < kk; ++k) {
                        out[b * dims * kk + d * kk + k] = gauss(xv - c.at(d, k), s.at(d, k));
                    }
                }
            }
            return out;
        }

        case OpKind::Mrbf: {
            const Tensor& x = in(0);
            const Tensor& c = in(1);
            const Tensor& s = in(2);
            const Tensor& w = in(3);
            if (x.rank() != 2 || c.rank() != 2 || s.rank() != 1 || w.rank() != 2 ||
                x.cols() != c.cols() || s.size() != c.rows() || w.cols() != c.rows()) {
                shape_error(kind, x, c);
            }
            const std::size_t batch = x.rows(), dims = x.cols();
            const std::size_t kk = c.rows(), jj = w.rows();
            Tensor out({batch, jj});
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t k = 0; k < kk; ++k) {
                    double r2 = 0.0;
                    for (std::size_t d = 0; d < dims; ++d) {
                        const double diff = x.at(b, d) - c.at(k, d);
                        r2 += diff * diff;
                    }
                    const double phi = std::exp(-r2 / (2.0 * s[k] * s[k]));
                    for (std::size_t j = 0; j < jj; ++j) out.at(b, j) += w.at(j, k) * phi;
                }
            }
            return out;
        }
    }
    throw ContractError("Graph::eval: unknown op kind");
}

void Graph::backward(NodeId loss) {
    if (loss >= nodes_.size()) throw ContractError("backward: node out of range");
    if (backward_done_) {
        throw ContractError("backward: already run on this graph; build a new graph per pass");
    }
    const Tensor& l = *nodes_[loss].out;
    if (!l.is_scalar()) {
        throw ContractError("backward: loss must be scalar, got " + shape_to_string(l.shape()));
    }
    backward_done_ = true;

    std::vector<std::vector<double>> adj(nodes_.size());
    adj[loss].assign(1, 1.0);

    auto touch = [&](NodeId id) -> std::vector<double>& {
        if (adj[id].empty()) adj[id].assign(nodes_[id].out->size(), 0.0);
        return adj[id];
    };

    for (NodeId id = nodes_.size(); id-- > 0;) {
        Node& node = nodes_[id];
        if (adj[id].empty()) continue;  // not reachable from loss
        const std::vector<double>& g = adj[id];
        const Tensor& out = *node.out;

        switch (node.kind) {
            case OpKind::Leaf: {
                if (node.out->requires_grad()) node.out->accumulate_grad(g);
                break;
            }
            case OpKind::Add: {
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case OpKind::Subtract: {
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] -= g[i];
                }
                break;
            }
            case OpKind::Multiply: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                const Tensor& b = *nodes_[node.inputs[1]].out;
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * b[i];
                    gb[i] += g[i] * a[i];
                }
                break;
            }
            case OpKind::Divide: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                const Tensor& b = *nodes_[node.inputs[1]].out;
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] / b[i];
                    gb[i] -= g[i] * a[i] / (b[i] * b[i]);
                }
                break;
            }
            case OpKind::Negate: {
                auto& ga = touch(node.inputs[0]);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
                break;
            }
            case OpKind::Exponential: {
                auto& ga = touch(node.inputs[0]);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out[i];
                break;
            }
            case OpKind::Square: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                auto& ga = touch(node.inputs[0]);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * a[i] * g[i];
                break;
            }
            case OpKind::Relu: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                auto& ga = touch(node.inputs[0]);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (a[i] > 0.0) ga[i] += g[i];
                }
                break;
            }
            case OpKind::MatMul: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                const Tensor& b = *nodes_[node.inputs[1]].out;
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
                // dA = G * B^T ; dB = A^T * G
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double gv = g[i * n + j];
                        if (gv == 0.0) continue;
                        for (std::size_t p = 0; p < k; ++p) {
                            ga[i * k + p] += gv * b[p * n + j];
                            gb[p * n + j] += a[i * k + p] * gv;
                        }
                    }
                }
                break;
            }
            case OpKind::Sum: {
                auto& ga = touch(node.inputs[0]);
                for (double& v : ga) v += g[0];
                break;
            }
            case OpKind::Mean: {
                auto& ga = touch(node.inputs[0]);
                const double share = g[0] / static_cast<double>(ga.size());
                for (double& v : ga) v += share;
                break;
            }
            case OpKind::BroadcastTo: {
                auto& ga = touch(node.inputs[0]);
                const std::size_t n = ga.size();
                for (std::size_t r = 0; r < node.attr; ++r) {
                    for (std::size_t j = 0; j < n; ++j) ga[j] += g[r * n + j];
                }
                break;
            }
            case OpKind::Concatenate: {
                const Tensor& a = *nodes_[node.inputs[0]].out;
                const Tensor& b = *nodes_[node.inputs[1]].out;
                auto& ga = touch(node.inputs[0]);
                auto& gb = touch(node.inputs[1]);
                if (a.rank() == 1) {
                    for (std::size_t i = 0; i < a.size(); ++i) ga[i] += g[i];
                    for (std::size_t i = 0; i < b.size(); ++i) gb[i] += g[a.size() + i];
                } else {
                    const std::size_t m = a.rows(), ca = a.cols(), cb = b.cols();
                    for (std::size_t r = 0; r < m; ++r) {
                        for (std::size_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * (ca + cb) + j];
                        for (std::size_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * (ca + cb) + ca + j];
                    }
                }
                break;
            }
            case OpKind::Urbf: {
                const Tensor& x = *nodes_[node.inputs[0]].out;
                const Tensor& c = *nodes_[node.inputs[1]].out;
                const Tensor& s = *nodes_[node.inputs[2]].out;
                auto& gx = touch(node.inputs[0]);
                auto& gc = touch(node.inputs[1]);
                auto& gs = touch(node.inputs[2]);
                const std::size_t batch = x.rows(), dims = x.cols(), kk = c.cols();
                for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t d = 0; d < dims; ++d) {
                        for (std::size_t k = 0; k < kk; ++k) {
                            const std::size_t o = b * dims * kk + d * kk + k;
                            const double gv = g[o];
                            if (gv == 0.0) continue;
                            const double z = out[o];
                            const double u = x.at(b, d) - c.at(d, k);
                            const double sv = s.at(d, k);
                            // dz/dx = -z u / s^2, dz/dc = z u / s^2, dz/ds = z u^2 / s^3
                            const double du = z * u / (sv * sv);
                            gx[b * dims + d] += -gv * du;
                            gc[d * kk + k] += gv * du;
                            gs[d * kk + k] += gv * z * u * u / (sv * sv * sv);
                        }
                    }
                }
                break;
            }
            case OpKind::Mrbf: {
                const Tensor& x = *nodes_[node.inputs[0]].out;
                const Tensor& c = *nodes_[node.inputs[1]].out;
                const Tensor& s = *nodes_[node.inputs[2]].out;
                const Tensor& w = *nodes_[node.inputs[3]].out;
                auto& gx = touch(node.inputs[0]);
                auto& gc = touch(node.inputs[1]);
                auto& gs = touch(node.inputs[2]);
                auto& gw = touch(node.inputs[3]);
                const std::size_t batch = x.rows(), dims = x.cols();
                const std::size_t kk = c.rows(), jj = w.rows();
                for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t k = 0; k < kk; ++k) {
                        double r2 = 0.0;
                        for (std::size_t d = 0; d < dims; ++d) {
                            const double diff = x.at(b, d) - c.at(k, d);
                            r2 += diff * diff;
                        }
                        const double sv = s[k];
                        const double phi = std::exp(-r2 / (2.0 * sv * sv));
                        double gphi = 0.0;
                        for (std::size_t j = 0; j < jj; ++j) {
                            const double gv = g[b * jj + j];
                            gphi += gv * w.at(j, k);
                            gw[j * kk + k] += gv * phi;
                        }
                        if (gphi == 0.0) continue;
                        for (std::size_t d = 0; d < dims; ++d) {
                            const double diff = x.at(b, d) - c.at(k, d);
                            const double t = gphi * phi * diff / (sv * sv);
                            gx[b * dims + d] += -t;
                            gc[k * dims + d] += t;
                        }
                        gs[k] += gphi * phi * r2 / (sv * sv * sv);
                    }
                }
                break;
            }
        }
    }
}

}  // namespace urbf
