#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace urbf {

struct GradcheckReport {
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst_rel_error = 0.0;
    bool passed() const { return cases > 0 && failures == 0; }
};

/// Randomized gradient checks: every operation kind plus both RBF layer
/// kinds (including d/dc and d/dsigma), backward vs central finite
/// differences (step 1e-5), relative tolerance 1e-4, values in [-2, 2].
GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t cases_per_kind = 20,
                              std::ostream* log = nullptr);

struct InjectivityReport {
    std::size_t kernels = 0;
    bool passed = false;
};

struct VerifyReport {
    std::vector<InjectivityReport> injectivity;  // K in {2, 5, 20}, 1000 pairs each
    std::vector<double> interpolation_mse;       // one per seed
    std::size_t interpolation_successes = 0;     // MSE < 1e-3 within budget
    bool passed() const;
};

/// Kernel-map injectivity and small-N interpolation capacity checks.
VerifyReport run_verify(std::uint64_t seed, std::ostream* log = nullptr);

}  // namespace urbf
