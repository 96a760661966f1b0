#pragma once

#include <functional>
#include <vector>

#include "urbf/tensor.hpp"

namespace urbf {

/// Central-difference gradient estimate for a scalar-valued function of a
/// parameter set: (f(p+h) - f(p-h)) / 2h per scalar entry. The parameters
/// are perturbed in place and restored before returning.
std::vector<std::vector<double>> finite_difference_gradient(
    const std::function<double()>& f,
    const std::vector<TensorPtr>& params,
    double step);

/// Largest relative error between an analytic gradient and its
/// finite-difference estimate, max(|a-b| / max(1e-4, |a|+|b|)); the
/// floor absorbs finite-difference roundoff on near-zero gradients.
double max_relative_error(const std::vector<double>& analytic,
                          const std::vector<double>& estimate);

}  // namespace urbf
