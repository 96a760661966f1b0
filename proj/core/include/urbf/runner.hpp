#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "urbf/dqn.hpp"
#include "urbf/layers.hpp"
#include "urbf/regression.hpp"

namespace urbf {

/// One compared architecture; per-architecture keys override the
/// experiment-wide defaults.
struct ArchConfig {
    std::string name;
    NetworkSpec network;
    std::optional<double> learning_rate;
    std::optional<double> range_lo;
    std::optional<double> range_hi;
};

struct ExperimentConfig {
    std::string task;  // "regression" or "maze"

    // regression
    TargetKind target_kind = TargetKind::Gaussian;
    std::size_t complexity = 5;
    std::size_t epochs = 300;
    std::size_t train_size = 7500;
    std::size_t test_size = 1000;

    // maze
    int maze_level = 1;
    StateEncoding encoding = StateEncoding::Coordinates;
    std::uint64_t total_timesteps = 150000;
    std::size_t learning_start = 30000;
    std::size_t buffer_capacity = 100000;
    std::size_t sync_period = 1000;
    double gamma = 0.99;

    // common defaults
    std::size_t batch_size = 256;
    double learning_rate = 1e-4;
    double range_lo = -5.0;
    double range_hi = 5.0;
    bool spreads_learnable = true;
    std::size_t repetitions = 1;
    std::uint64_t base_seed = 1;
    std::string out_dir = "results";

    std::vector<ArchConfig> architectures;

    static ExperimentConfig parse(std::istream& is);
    static ExperimentConfig parse_file(const std::string& path);
    void serialize(std::ostream& os) const;

    /// Builds every architecture against the task's input/output widths;
    /// throws on any composition mismatch.
    void validate() const;

    /// Reduced budgets for the desk-scale acceptance runs.
    void apply_desk_scale();

    /// Content hash of the serialized config (FNV-1a 64).
    std::uint64_t fingerprint() const;

    std::size_t task_input_dim() const;
    std::size_t task_output_dim() const;
};

struct RunResult {
    std::string architecture;
    std::uint64_t config_fingerprint = 0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double final_metric = 0.0;  // test MSE or average reward per timestep
    std::vector<std::pair<double, double>> trace;  // (epoch, test MSE) or (end timestep, return)
    double duration_seconds = 0.0;
    std::size_t parameter_count = 0;
    std::string task;
    double axis_complexity = 0.0;
    double axis_nnpi = 0.0;
    bool failed = false;
    std::string error;
};

/// Runs every architecture for every repetition (seed = base_seed +
/// repetition index), persisting each result as it completes. A crashed
/// repetition is recorded as failed without aborting its siblings.
std::vector<RunResult> run_experiment(const ExperimentConfig& config);

/// Single repetition, no persistence.
RunResult run_single(const ExperimentConfig& config, const ArchConfig& arch,
                     std::size_t repetition);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // population divisor N
    std::size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

struct AggregateRecord {
    std::string task;
    std::string architecture;
    double axis_value = 0.0;
    Aggregate stats;
};

/// One row per (architecture, axis value), sorted by axis value:
/// "architecture,<axis>,mean,std,count". Mixed tasks are rejected.
void emit_plot_data(const std::vector<AggregateRecord>& records,
                    const std::string& axis_name, std::ostream& os);

void save_run_result(const RunResult& result, const ExperimentConfig& config,
                     const std::string& dir);
std::vector<RunResult> load_run_results(const std::string& dir);

/// NNPI of the first U-RBF layer in a spec, or 0 when there is none.
std::size_t spec_nnpi(const NetworkSpec& spec);

}  // namespace urbf
