#include "urbf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace urbf {

std::vector<std::vector<double>> finite_difference_gradient(
    const std::function<double()>& f,
    const std::vector<TensorPtr>& params,
    double step) {
    if (step <= 0.0) throw ContractError("finite_difference_gradient: step must be > 0");
    std::vector<std::vector<double>> grads;
    grads.reserve(params.size());
    for (const TensorPtr& p : params) {
        std::vector<double> g(p->size());
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double saved = (*p)[i];
            (*p)[i] = saved + step;
            const double fp = f();
            (*p)[i] = saved - step;
            const double fm = f();
            (*p)[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                throw ContractError("finite_difference_gradient: non-finite value at perturbed point");
            }
            g[i] = (fp - fm) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double max_relative_error(const std::vector<double>& analytic,
                          const std::vector<double>& estimate) {
    if (analytic.size() != estimate.size()) {
        throw ContractError("max_relative_error: length mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        // The floor turns the bound into an absolute tolerance for tiny
        // gradients, which a central difference cannot resolve below the
        // roundoff level of the surrounding loss (~1e-10 here).
        const double denom = std::max(1e-4, std::abs(analytic[i]) + std::abs(estimate[i]));
        worst = std::max(worst, std::abs(analytic[i] - estimate[i]) / denom);
    }
    return worst;
}

}  // namespace urbf
