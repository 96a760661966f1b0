#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "urbf/runner.hpp"
#include "urbf/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRunFailure = 2;
constexpr int kExitVerifyFailure = 3;

struct SweepOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t reps = 0;
    std::string out_dir;
    bool desk_scale = false;
};

void add_common_flags(CLI::App* cmd, SweepOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file")->required();
    cmd->add_option("--seed", opts.seed, "override base seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--reps", opts.reps, "override repetition count");
    cmd->add_option("--out", opts.out_dir, "override output directory");
    cmd->add_flag("--desk-scale", opts.desk_scale, "apply reduced desk-scale budgets");
}

int run_sweep(const SweepOptions& opts, const std::string& expected_task) {
    urbf::ExperimentConfig config;
    try {
        config = urbf::ExperimentConfig::parse_file(opts.config_path);
        if (config.task != expected_task) {
            throw urbf::ContractError("config task is '" + config.task + "', expected '" +
                                      expected_task + "'");
        }
        if (opts.seed_set) config.base_seed = opts.seed;
        if (opts.reps > 0) config.repetitions = opts.reps;
        if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
        if (opts.desk_scale) config.apply_desk_scale();
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        const auto results = urbf::run_experiment(config);
        bool any_failed = false;
        std::map<std::string, std::vector<double>> finals;
        for (const urbf::RunResult& r : results) {
            if (r.failed) {
                any_failed = true;
                std::cerr << r.architecture << " rep " << r.repetition << " failed: "
                          << r.error << "\n";
                continue;
            }
            finals[r.architecture].push_back(r.final_metric);
            std::cout << r.architecture << " rep " << r.repetition << " seed " << r.seed
                      << ": final metric " << r.final_metric << " (params "
                      << r.parameter_count << ", " << r.duration_seconds << " s)\n";
        }
        for (const auto& [arch, values] : finals) {
            const urbf::Aggregate agg = urbf::aggregate(values);
            std::cout << arch << ": mean " << agg.mean << " std " << agg.stddev
                      << " over " << agg.count << " repetitions\n";
        }
        return any_failed ? kExitRunFailure : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "run failure: " << e.what() << "\n";
        return kExitRunFailure;
    }
}

int run_aggregate(const std::string& results_dir, const std::string& axis,
                  const std::string& plot_path) {
    try {
        const auto results = urbf::load_run_results(results_dir);
        std::map<std::pair<std::string, double>, std::vector<double>> groups;
        std::string task;
        for (const urbf::RunResult& r : results) {
            if (r.failed) continue;
            if (task.empty()) task = r.task;
            double axis_value = 0.0;
            if (axis == "complexity") axis_value = r.axis_complexity;
            else if (axis == "nnpi") axis_value = r.axis_nnpi;
            else if (axis == "param_count") axis_value = static_cast<double>(r.parameter_count);
            else throw urbf::ContractError("unknown axis '" + axis + "'");
            groups[{r.architecture, axis_value}].push_back(r.final_metric);
        }
        std::vector<urbf::AggregateRecord> records;
        for (const auto& [key, values] : groups) {
            records.push_back({task, key.first, key.second, urbf::aggregate(values)});
        }
        if (plot_path.empty()) {
            urbf::emit_plot_data(records, axis, std::cout);
        } else {
            std::ofstream os(plot_path);
            if (!os) throw urbf::ContractError("cannot write " + plot_path);
            urbf::emit_plot_data(records, axis, os);
            std::cout << "wrote " << records.size() << " rows to " << plot_path << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "aggregate error: " << e.what() << "\n";
        return kExitRunFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"U-RBF layer experiments: function regression and maze deep Q-learning"};
    app.require_subcommand(1);

    SweepOptions regress_opts;
    CLI::App* regress = app.add_subcommand("regress", "function-regression sweep");
    add_common_flags(regress, regress_opts);

    SweepOptions maze_opts;
    CLI::App* maze = app.add_subcommand("maze", "maze reinforcement-learning sweep");
    add_common_flags(maze, maze_opts);

    std::uint64_t gradcheck_seed = 7;
    std::size_t gradcheck_cases = 20;
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "autodiff verification suite");
    gradcheck->add_option("--seed", gradcheck_seed, "rng seed");
    gradcheck->add_option("--cases", gradcheck_cases, "cases per operation kind");

    std::uint64_t verify_seed = 7;
    CLI::App* verify = app.add_subcommand(
        "verify", "kernel-map injectivity and interpolation capacity checks");
    verify->add_option("--seed", verify_seed, "rng seed");

    std::string agg_dir;
    std::string agg_axis = "complexity";
    std::string agg_plot;
    CLI::App* agg = app.add_subcommand("aggregate", "summaries and plot data from stored results");
    agg->add_option("--out", agg_dir, "results directory to aggregate")->required();
    agg->add_option("--axis", agg_axis, "complexity | nnpi | param_count");
    agg->add_option("--plot-file", agg_plot, "write plot table here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (*regress) return run_sweep(regress_opts, "regression");
    if (*maze) return run_sweep(maze_opts, "maze");
    if (*gradcheck) {
        const urbf::GradcheckReport report =
            urbf::run_gradcheck(gradcheck_seed, gradcheck_cases, &std::cout);
        return report.passed() ? kExitOk : kExitVerifyFailure;
    }
    if (*verify) {
        const urbf::VerifyReport report = urbf::run_verify(verify_seed, &std::cout);
        return report.passed() ? kExitOk : kExitVerifyFailure;
    }
    if (*agg) return run_aggregate(agg_dir, agg_axis, agg_plot);
    return kExitOk;
}
