#include "urbf/regression.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "urbf/optim.hpp"

namespace urbf {

double GaussianTarget::eval(double x, double y) const {
    double v = x + y;
    for (const GaussianBump& b : components) {
        const double dx = x - b.mu_x;
        const double dy = y - b.mu_y;
        const double s2 = 2.0 * b.sigma * b.sigma;
        v += 3.0 * std::exp(-dx * dx / s2) * std::exp(-dy * dy / s2);
    }
    return v;
}

double DiscontinuousTarget::eval(double x, double y) const {
    double v = x + y;
    for (const Plateau& p : components) {
        if (p.region.contains(x, y)) {
            v += p.height;
            break;  // regions are disjoint
        }
    }
    return v;
}

TargetKind target_kind_from_string(const std::string& s) {
    if (s == "gaussian") return TargetKind::Gaussian;
    if (s == "discontinuous") return TargetKind::Discontinuous;
    throw ContractError("unknown target kind '" + s + "'");
}

std::string to_string(TargetKind kind) {
    return kind == TargetKind::Gaussian ? "gaussian" : "discontinuous";
}

GaussianTarget sample_gaussian_target(std::size_t complexity, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mu(-5.0, 5.0);
    std::uniform_real_distribution<double> sigma(0.4, 0.8);
    GaussianTarget target;
    target.components.reserve(complexity);
    for (std::size_t i = 0; i < complexity; ++i) {
        target.components.push_back({mu(rng), mu(rng), sigma(rng)});
    }
    return target;
}

DiscontinuousTarget sample_discontinuous_target(std::size_t complexity,
                                                std::mt19937_64& rng) {
    std::uniform_real_distribution<double> center(-5.0, 5.0);
    std::uniform_real_distribution<double> side(1.0, 3.0);
    std::uniform_real_distribution<double> height(1.0, 10.0);
    DiscontinuousTarget target;
    for (std::size_t i = 0; i < complexity; ++i) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < 10000; ++attempt) {
            const double cx = center(rng);
            const double cy = center(rng);
            const double hw = side(rng) / 2.0;
            const double hh = side(rng) / 2.0;
            Rect r{std::max(cx - hw, -5.0), std::min(cx + hw, 5.0),
                   std::max(cy - hh, -5.0), std::min(cy + hh, 5.0)};
            const bool disjoint = std::none_of(
                target.components.begin(), target.components.end(),
                [&](const Plateau& p) { return p.region.overlaps(r); });
            if (disjoint) {
                target.components.push_back({r, height(rng)});
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw ContractError("sample_discontinuous_target: rejection budget exhausted");
        }
    }
    return target;
}

void export_split_csv(const std::vector<double>& inputs,
                      const std::vector<double>& targets, std::ostream& os) {
    if (inputs.size() != targets.size() * 2) {
        throw ContractError("export_split_csv: inputs/targets size mismatch");
    }
    os.precision(17);
    os << "x,y,target\n";
    for (std::size_t i = 0; i < targets.size(); ++i) {
        os << inputs[2 * i] << "," << inputs[2 * i + 1] << "," << targets[i] << "\n";
    }
}

void import_split_csv(std::istream& is, std::vector<double>& inputs,
                      std::vector<double>& targets) {
    inputs.clear();
    targets.clear();
    std::string line;
    if (!std::getline(is, line)) throw ContractError("import_split_csv: empty file");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string xs, ys, ts;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') ||
            !std::getline(ss, ts)) {
            throw ContractError("import_split_csv: malformed row '" + line + "'");
        }
        inputs.push_back(std::stod(xs));
        inputs.push_back(std::stod(ys));
        targets.push_back(std::stod(ts));
    }
}

namespace {

double evaluate_mse(const Network& net, const std::vector<double>& inputs,
                    const std::vector<double>& targets) {
    const std::size_t n = targets.size();
    Graph g;
    NodeId x = g.leaf(Tensor::from({n, 2}, inputs));
    NodeId y = g.leaf(Tensor::from({n, 1}, targets));
    NodeId loss = g.mean(g.square(g.subtract(net.forward(g, x), y)));
    return g.value(loss)[0];
}

}  // namespace

RegressionTrainResult train_regression(const NetworkSpec& spec,
                                       const RegressionDataset& data,
                                       const RegressionTrainConfig& config,
                                       Network* out_net) {
    if (data.train_size() == 0 || data.test_size() == 0) {
        throw ContractError("train_regression: missing data split");
    }
    BuildOptions opts;
    opts.range_lo = config.range_lo;
    opts.range_hi = config.range_hi;
    opts.spreads_learnable = config.spreads_learnable;
    opts.seed = config.seed;
    Network net = Network::build(spec, 2, 1, opts);
    Adam adam(net.parameters(), AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});

    std::mt19937_64 shuffle_rng(config.seed ^ 0xd1b54a32d192ed03ull);
    std::vector<std::size_t> order(data.train_size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    RegressionTrainResult result;
    result.parameter_count = net.parameter_count();
    result.train_mse.reserve(config.epochs);
    result.test_mse.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, order.size() - start);
            std::vector<double> bx(count * 2);
            std::vector<double> by(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t idx = order[start + i];
                bx[2 * i] = data.train_inputs[2 * idx];
                bx[2 * i + 1] = data.train_inputs[2 * idx + 1];
                by[i] = data.train_targets[idx];
            }
            Graph g;
            NodeId x = g.leaf(Tensor::from({count, 2}, std::move(bx)));
            NodeId y = g.leaf(Tensor::from({count, 1}, std::move(by)));
            NodeId loss = g.mean(g.square(g.subtract(net.forward(g, x), y)));
            const double loss_value = g.value(loss)[0];
            if (!std::isfinite(loss_value)) {
                throw ContractError("train_regression: non-finite loss at epoch " +
                                    std::to_string(epoch));
            }
            epoch_loss += loss_value * static_cast<double>(count);
            seen += count;
            adam.zero_grad();
            g.backward(loss);
            adam.step();
            net.project_constraints();
        }
        result.train_mse.push_back(epoch_loss / static_cast<double>(seen));
        result.test_mse.push_back(evaluate_mse(net, data.test_inputs, data.test_targets));
    }
    result.final_test_mse = result.test_mse.back();
    if (out_net) *out_net = std::move(net);
    return result;
}

}  // namespace urbf
