#include "urbf/tensor.hpp"

#include <cmath>
#include <sstream>

namespace urbf {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

std::size_t Tensor::checked_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) throw ContractError("Tensor: zero extent in shape " + shape_to_string(shape));
        n *= e;
    }
    return n;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    Tensor t;
    t.shape_ = std::move(shape);
    if (checked_size(t.shape_) != values.size()) {
        throw ContractError("Tensor: shape " + shape_to_string(t.shape_) +
                            " does not match value count " + std::to_string(values.size()));
    }
    t.values_ = std::move(values);
    t.requires_grad_ = requires_grad;
    return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw ContractError("Tensor: rows() on rank-" + std::to_string(rank()) + " tensor");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw ContractError("Tensor: cols() on rank-" + std::to_string(rank()) + " tensor");
    return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    return values_[r * cols() + c];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
}

std::vector<double>& Tensor::grad() {
    if (!grad_) grad_.emplace(values_.size(), 0.0);
    return *grad_;
}

const std::vector<double>& Tensor::grad() const {
    if (!grad_) throw ContractError("Tensor: grad() on tensor without gradient");
    return *grad_;
}

void Tensor::zero_grad() {
    grad_.emplace(values_.size(), 0.0);
}

void Tensor::accumulate_grad(const std::vector<double>& delta) {
    if (delta.size() != values_.size()) {
        throw ContractError("Tensor: gradient size mismatch");
    }
    auto& g = grad();
    for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace urbf
