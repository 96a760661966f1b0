#pragma once

#include <cstdint>
#include <vector>

#include "urbf/tensor.hpp"

namespace urbf {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. Parameter constraint projection (spread
/// clamping) is applied by the caller after each step.
class Adam {
public:
    Adam(std::vector<TensorPtr> params, AdamConfig config);

    /// One update from the gradients currently stored on the parameters.
    /// A parameter without a gradient is treated as having zero gradient.
    void step();

    void zero_grad();

    std::uint64_t step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<TensorPtr>& params() const { return params_; }

private:
    std::vector<TensorPtr> params_;
    AdamConfig config_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace urbf
