#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace urbf {

/// Contract violations (shape mismatches, domain errors, invariant breaks).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

/// Dense real-valued array, row-major. Participates in a computation
/// graph through Graph leaves; gradients accumulate into `grad`.
class Tensor {
public:
    Tensor() = default;

    Tensor(Shape shape, double fill = 0.0, bool requires_grad = false)
        : shape_(std::move(shape)),
          values_(checked_size(shape_), fill),
          requires_grad_(requires_grad) {}

    static Tensor from(Shape shape, std::vector<double> values,
                       bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    std::size_t rank() const { return shape_.size(); }
    bool is_scalar() const { return values_.size() == 1; }

    // rank-2 accessors
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool requires_grad() const { return requires_grad_; }
    void set_requires_grad(bool rg) { requires_grad_ = rg; }

    bool has_grad() const { return grad_.has_value(); }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void zero_grad();
    void drop_grad() { grad_.reset(); }
    void accumulate_grad(const std::vector<double>& delta);

    /// True iff every value is finite.
    bool all_finite() const;

private:
    static std::size_t checked_size(const Shape& shape);

    Shape shape_;
    std::vector<double> values_;
    bool requires_grad_ = false;
    std::optional<std::vector<double>> grad_;
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(Shape shape, double fill = 0.0,
                             bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(shape), fill, requires_grad);
}

}  // namespace urbf
