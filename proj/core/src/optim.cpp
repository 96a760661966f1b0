#include "urbf/optim.hpp"

#include <cmath>
#include <string>

namespace urbf {

Adam::Adam(std::vector<TensorPtr> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const TensorPtr& p : params_) {
        m_.emplace_back(p->size(), 0.0);
        v_.emplace_back(p->size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double b1t = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double b2t = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = *params_[pi];
        if (!p.has_grad()) continue;
        const std::vector<double>& g = p.grad();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i])) {
                throw ContractError("adam_step: non-finite gradient in parameter " +
                                    std::to_string(pi) + " at index " + std::to_string(i));
            }
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / b1t;
            const double vhat = v[i] / b2t;
            p[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void Adam::zero_grad() {
    for (const TensorPtr& p : params_) p->zero_grad();
}

}  // namespace urbf
