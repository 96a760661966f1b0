#include "urbf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "urbf/gradcheck.hpp"
#include "urbf/graph.hpp"
#include "urbf/layers.hpp"

namespace urbf {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kRelTol = 1e-4;

TensorPtr random_tensor(Shape shape, std::mt19937_64& rng, double lo = -2.0,
                        double hi = 2.0) {
    auto t = make_tensor(std::move(shape), 0.0, true);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : t->values()) v = dist(rng);
    return t;
}

/// Keeps values away from a point where the operation is nonsmooth or
/// undefined (relu kink, divide by zero).
void push_away_from(TensorPtr t, double point, double margin) {
    for (double& v : t->values()) {
        if (std::abs(v - point) < margin) v = point + (v >= point ? margin : -margin);
    }
}

struct Case {
    std::vector<TensorPtr> params;
    std::function<NodeId(Graph&, const std::vector<NodeId>&)> build;
};

/// Runs one case: scalar loss = sum(out * fixed random weights), then
/// backward vs finite differences over every parameter.
bool run_case(const Case& c, std::mt19937_64& rng, double& worst) {
    // Fixed random per-element adjoints so backward paths are exercised
    // with non-uniform output gradients.
    std::vector<double> weights;
    auto loss_value = [&]() -> double {
        Graph g;
        std::vector<NodeId> ids;
        ids.reserve(c.params.size());
        for (const TensorPtr& p : c.params) ids.push_back(g.leaf(p));
        NodeId out = c.build(g, ids);
        const Tensor& t = g.value(out);
        if (weights.empty()) {
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            weights.resize(t.size());
            for (double& w : weights) w = dist(rng);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) s += weights[i] * t[i];
        return s;
    };

    // Analytic gradients.
    {
        Graph g;
        std::vector<NodeId> ids;
        for (const TensorPtr& p : c.params) {
            p->zero_grad();
            ids.push_back(g.leaf(p));
        }
        NodeId out = c.build(g, ids);
        (void)loss_value();  // seed the weights
        NodeId w = g.leaf(Tensor::from(g.value(out).shape(), weights));
        NodeId loss = g.sum(g.multiply(out, w));
        g.backward(loss);
    }

    const auto fd = finite_difference_gradient(loss_value, c.params, kFdStep);
    bool ok = true;
    for (std::size_t i = 0; i < c.params.size(); ++i) {
        const double err = max_relative_error(c.params[i]->grad(), fd[i]);
        worst = std::max(worst, err);
        if (err > kRelTol) ok = false;
    }
    return ok;
}

}  // namespace

GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t cases_per_kind,
                              std::ostream* log) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    GradcheckReport report;

    struct KindGen {
        const char* name;
        std::function<Case(std::mt19937_64&)> make;
    };

    auto binary = [&](OpKind kind) {
        return [kind, &dim](std::mt19937_64& r) {
            Shape shape{dim(r), dim(r)};
            auto a = random_tensor(shape, r);
            auto b = random_tensor(shape, r);
            if (kind == OpKind::Divide) push_away_from(b, 0.0, 0.5);
            return Case{{a, b}, [kind](Graph& g, const std::vector<NodeId>& in) {
                            return g.apply(kind, {in[0], in[1]});
                        }};
        };
    };
    auto unary = [&](OpKind kind) {
        return [kind, &dim](std::mt19937_64& r) {
            auto a = random_tensor({dim(r), dim(r)}, r);
            if (kind == OpKind::Relu) push_away_from(a, 0.0, 1e-3);
            return Case{{a}, [kind](Graph& g, const std::vector<NodeId>& in) {
                            return g.apply(kind, {in[0]});
                        }};
        };
    };

    const std::vector<KindGen> kinds = {
        {"add", binary(OpKind::Add)},
        {"subtract", binary(OpKind::Subtract)},
        {"multiply", binary(OpKind::Multiply)},
        {"divide", binary(OpKind::Divide)},
        {"negate", unary(OpKind::Negate)},
        {"exponential", unary(OpKind::Exponential)},
        {"square", unary(OpKind::Square)},
        {"relu", unary(OpKind::Relu)},
        {"matrix_multiply",
         [&dim](std::mt19937_64& r) {
             const std::size_t m = dim(r), k = dim(r), n = dim(r);
             auto a = random_tensor({m, k}, r);
             auto b = random_tensor({k, n}, r);
             return Case{{a, b}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.matmul(in[0], in[1]);
                         }};
         }},
        {"sum",
         [&dim](std::mt19937_64& r) {
             auto a = random_tensor({dim(r), dim(r)}, r);
             return Case{{a}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.sum(in[0]);
                         }};
         }},
        {"mean",
         [&dim](std::mt19937_64& r) {
             auto a = random_tensor({dim(r), dim(r)}, r);
             return Case{{a}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.mean(in[0]);
                         }};
         }},
        {"broadcast_to",
         [&dim](std::mt19937_64& r) {
             auto a = random_tensor({dim(r)}, r);
             const std::size_t rows = dim(r);
             return Case{{a}, [rows](Graph& g, const std::vector<NodeId>& in) {
                             return g.broadcast_to(in[0], rows);
                         }};
         }},
        {"concatenate",
         [&dim](std::mt19937_64& r) {
             const std::size_t rows = dim(r);
             auto a = random_tensor({rows, dim(r)}, r);
             auto b = random_tensor({rows, dim(r)}, r);
             return Case{{a, b}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.concatenate(in[0], in[1]);
                         }};
         }},
        {"urbf",
         [&dim](std::mt19937_64& r) {
             const std::size_t batch = dim(r), d = dim(r), k = dim(r) + 1;
             auto x = random_tensor({batch, d}, r);
             auto c = random_tensor({d, k}, r);
             auto s = random_tensor({d, k}, r, 0.3, 1.5);
             return Case{{x, c, s}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.urbf(in[0], in[1], in[2]);
                         }};
         }},
        {"mrbf",
         [&dim](std::mt19937_64& r) {
             const std::size_t batch = dim(r), d = dim(r), k = dim(r) + 1, j = dim(r);
             auto x = random_tensor({batch, d}, r);
             auto c = random_tensor({k, d}, r);
             auto s = random_tensor({k}, r, 0.3, 1.5);
             auto w = random_tensor({j, k}, r);
             return Case{{x, c, s, w}, [](Graph& g, const std::vector<NodeId>& in) {
                             return g.mrbf(in[0], in[1], in[2], in[3]);
                         }};
         }},
    };

    for (const KindGen& kg : kinds) {
        std::size_t kind_failures = 0;
        for (std::size_t i = 0; i < cases_per_kind; ++i) {
            Case c = kg.make(rng);
            ++report.cases;
            if (!run_case(c, rng, report.worst_rel_error)) {
                ++report.failures;
                ++kind_failures;
            }
        }
        if (log) {
            *log << "gradcheck " << kg.name << ": " << (cases_per_kind - kind_failures)
                 << "/" << cases_per_kind << " ok\n";
        }
    }
    if (log) {
        *log << "gradcheck total: " << (report.cases - report.failures) << "/"
             << report.cases << " ok, worst relative error " << report.worst_rel_error
             << "\n";
    }
    return report;
}

bool VerifyReport::passed() const {
    if (injectivity.empty()) return false;
    for (const InjectivityReport& r : injectivity) {
        if (!r.passed) return false;
    }
    return interpolation_successes >= 4;
}

VerifyReport run_verify(std::uint64_t seed, std::ostream* log) {
    VerifyReport report;
    for (std::size_t k : {std::size_t{2}, std::size_t{5}, std::size_t{20}}) {
        const UrbfLayer layer = UrbfLayer::create(1, k, -5.0, 5.0);
        const bool ok = check_injectivity(layer, 1000, seed + k);
        report.injectivity.push_back({k, ok});
        if (log) {
            *log << "injectivity K=" << k << " (1000 pairs): " << (ok ? "ok" : "FAIL")
                 << "\n";
        }
    }
    for (std::size_t s = 0; s < 5; ++s) {
        const InterpolationResult r = check_interpolation(10, seed + 100 + s, 5000);
        report.interpolation_mse.push_back(r.final_mse);
        if (r.final_mse < 1e-3) ++report.interpolation_successes;
        if (log) {
            *log << "interpolation N=10 seed " << s << ": MSE " << r.final_mse << " after "
                 << r.epochs_run << " epochs\n";
        }
    }
    if (log) {
        *log << "interpolation: " << report.interpolation_successes << "/5 seeds below 1e-3\n";
    }
    return report;
}

}  // namespace urbf
