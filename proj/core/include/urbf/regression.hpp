#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "urbf/layers.hpp"

namespace urbf {

/// Gaussian bumps of fixed elevation 3 on the plane x + y.
struct GaussianBump {
    double mu_x = 0.0;
    double mu_y = 0.0;
    double sigma = 0.5;
};

struct GaussianTarget {
    std::vector<GaussianBump> components;
    double eval(double x, double y) const;
};

struct Rect {
    double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
    bool contains(double x, double y) const {
        return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
    }
    bool overlaps(const Rect& other) const {
        return x_lo < other.x_hi && other.x_lo < x_hi &&
               y_lo < other.y_hi && other.y_lo < y_hi;
    }
};

/// Elevated rectangular plateaus on the plane x + y; regions are
/// pairwise disjoint.
struct Plateau {
    Rect region;
    double height = 0.0;
};

struct DiscontinuousTarget {
    std::vector<Plateau> components;
    double eval(double x, double y) const;
};

enum class TargetKind { Gaussian, Discontinuous };

TargetKind target_kind_from_string(const std::string& s);
std::string to_string(TargetKind kind);

GaussianTarget sample_gaussian_target(std::size_t complexity, std::mt19937_64& rng);
/// Rejection-samples until the regions are pairwise disjoint; throws
/// after 10,000 failed attempts.
DiscontinuousTarget sample_discontinuous_target(std::size_t complexity, std::mt19937_64& rng);

struct RegressionDataset {
    std::vector<double> train_inputs;   // [n_train x 2] row-major
    std::vector<double> train_targets;  // [n_train]
    std::vector<double> test_inputs;    // [n_test x 2]
    std::vector<double> test_targets;   // [n_test]

    std::size_t train_size() const { return train_targets.size(); }
    std::size_t test_size() const { return test_targets.size(); }
};

template <typename TargetFn>
RegressionDataset sample_dataset(const TargetFn& target, std::size_t n_train,
                                 std::size_t n_test, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    RegressionDataset data;
    auto fill = [&](std::vector<double>& inputs, std::vector<double>& targets, std::size_t n) {
        inputs.resize(n * 2);
        targets.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = dist(rng);
            const double y = dist(rng);
            inputs[2 * i] = x;
            inputs[2 * i + 1] = y;
            targets[i] = target.eval(x, y);
        }
    };
    fill(data.train_inputs, data.train_targets, n_train);
    fill(data.test_inputs, data.test_targets, n_test);
    return data;
}

/// Writes one split as "x,y,target" CSV (train and test go to separate files).
void export_split_csv(const std::vector<double>& inputs,
                      const std::vector<double>& targets, std::ostream& os);
/// Reads a "x,y,target" CSV back into (inputs, targets).
void import_split_csv(std::istream& is, std::vector<double>& inputs,
                      std::vector<double>& targets);

struct RegressionTrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 256;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    double range_lo = -5.0;
    double range_hi = 5.0;
    bool spreads_learnable = true;
};

struct RegressionTrainResult {
    std::vector<double> train_mse;  // one entry per epoch
    std::vector<double> test_mse;
    double final_test_mse = 0.0;
    std::size_t parameter_count = 0;
};

/// Mini-batch Adam on the MSE loss; data is reshuffled every epoch from
/// the run seed. Returns the trained network through `out_net` when
/// non-null.
RegressionTrainResult train_regression(const NetworkSpec& spec,
                                       const RegressionDataset& data,
                                       const RegressionTrainConfig& config,
                                       Network* out_net = nullptr);

}  // namespace urbf
