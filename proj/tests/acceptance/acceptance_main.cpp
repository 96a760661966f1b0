// End-to-end acceptance suite. Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "urbf/dqn.hpp"
#include "urbf/layers.hpp"
#include "urbf/maze.hpp"
#include "urbf/regression.hpp"
#include "urbf/runner.hpp"
#include "urbf/verify.hpp"

namespace {

using namespace urbf;

constexpr std::uint64_t kBaseSeed = 1;
constexpr std::size_t kSeeds = 5;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  (%s)\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------- criterion 1
bool criterion_gradients() {
    const GradcheckReport rep = run_gradcheck(kBaseSeed);
    const bool pass = rep.passed() && rep.cases >= 200;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%zu cases, %zu failures, worst relative error %.3e",
                  rep.cases, rep.failures, rep.worst_rel_error);
    report(1, pass, detail);
    return pass;
}

// ---------------------------------------------------------------- criterion 2
bool criterion_properties() {
    const VerifyReport rep = run_verify(kBaseSeed);
    bool injective = !rep.injectivity.empty();
    for (const InjectivityReport& r : rep.injectivity) injective = injective && r.passed;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "injectivity banks all distinct: %s; interpolation %zu/%zu seeds below 1e-3",
                  injective ? "yes" : "no", rep.interpolation_successes,
                  rep.interpolation_mse.size());
    const bool pass = rep.passed();
    report(2, pass, detail);
    return pass;
}

// -------------------------------------------------------- regression machinery

/// Final test MSE for one (target kind, architecture, seed) cell.
/// The dataset depends only on (kind, complexity, seed), so architectures
/// compared at the same seed see identical data.
double regression_cell(TargetKind kind, std::size_t complexity,
                       const std::string& arch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RegressionDataset data;
    if (kind == TargetKind::Gaussian) {
        const GaussianTarget target = sample_gaussian_target(complexity, rng);
        data = sample_dataset(target, 7500, 1000, rng);
    } else {
        const DiscontinuousTarget target = sample_discontinuous_target(complexity, rng);
        data = sample_dataset(target, 7500, 1000, rng);
    }
    RegressionTrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch_size = 256;
    cfg.learning_rate = 1e-4;
    cfg.seed = seed;
    cfg.range_lo = -5.0;
    cfg.range_hi = 5.0;
    return train_regression(NetworkSpec::parse(arch), data, cfg).final_test_mse;
}

std::vector<double> regression_seeds(TargetKind kind, std::size_t complexity,
                                     const std::string& arch) {
    std::vector<double> finals;
    for (std::size_t i = 0; i < kSeeds; ++i) {
        finals.push_back(regression_cell(kind, complexity, arch, kBaseSeed + i));
        std::printf("  [regression %s arch=%s seed=%llu] final test MSE %.6f\n",
                    to_string(kind).c_str(), arch.c_str(),
                    static_cast<unsigned long long>(kBaseSeed + i), finals.back());
        std::fflush(stdout);
    }
    return finals;
}

// ---------------------------------------------------------------- criterion 3
bool criterion_gaussian_ordering(std::vector<double>& urbf20_out) {
    const auto mlp = regression_seeds(TargetKind::Gaussian, 5, "32,64,128");
    const auto urbf = regression_seeds(TargetKind::Gaussian, 5, "urbf:20,32,64,128");
    urbf20_out = urbf;
    const double mlp_mean = mean_of(mlp);
    const double urbf_mean = mean_of(urbf);
    const bool pass = urbf_mean <= 0.8 * mlp_mean;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "gaussian M=5: kernel-layer mean %.4f vs dense mean %.4f (need <= 0.8x)",
                  urbf_mean, mlp_mean);
    report(3, pass, detail);
    return pass;
}

// ---------------------------------------------------------------- criterion 4
bool criterion_discontinuous() {
    const auto mlp = regression_seeds(TargetKind::Discontinuous, 5, "32,64,128");
    const auto urbf = regression_seeds(TargetKind::Discontinuous, 5, "urbf:40,32,64,128");
    const double mlp_mean = mean_of(mlp);
    const double urbf_mean = mean_of(urbf);
    const bool pass = urbf_mean <= 0.7 * mlp_mean;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "discontinuous M=5: kernel-layer mean %.4f vs dense mean %.4f (need <= 0.7x)",
                  urbf_mean, mlp_mean);
    report(4, pass, detail);
    return pass;
}

// ---------------------------------------------------------------- criterion 5
bool criterion_nnpi_plateau(const std::vector<double>& urbf20) {
    std::map<int, std::vector<double>> finals;
    finals[20] = urbf20;  // shared with criterion 3's sweep cell
    for (int nnpi : {5, 10, 40}) {
        finals[nnpi] = regression_seeds(TargetKind::Gaussian, 5,
                                        "urbf:" + std::to_string(nnpi) + ",32,64,128");
    }
    const double m5 = mean_of(finals[5]);
    const double m20 = mean_of(finals[20]);
    const double m40 = mean_of(finals[40]);
    // Pooled within-group std across the whole sweep: the 20-vs-40 gap
    // must be small on the scale of the sweep's seed-to-seed variation
    // (the 10-vs-20 improvement exceeds this scale; a flat tail does not).
    double pooled_var = 0.0;
    for (const auto& [nnpi, v] : finals) {
        const Aggregate a = aggregate(v);
        pooled_var += a.stddev * a.stddev;
    }
    const double pooled = std::sqrt(pooled_var / static_cast<double>(finals.size()));
    const bool plateau = m20 <= m5 && m40 <= m5;
    const bool close = std::abs(m20 - m40) <= pooled || pooled == 0.0;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "means by kernels-per-input 5/10/20/40: %.4f / %.4f / %.4f / %.4f; "
                  "|m20-m40|=%.4f vs pooled std %.4f",
                  m5, mean_of(finals[10]), m20, m40, std::abs(m20 - m40), pooled);
    const bool pass = plateau && close;
    report(5, pass, detail);
    return pass;
}

// ---------------------------------------------------------------- criterion 6
DqnConfig maze_config(const std::string& arch, std::uint64_t seed) {
    DqnConfig cfg;
    cfg.maze_level = 1;
    cfg.encoding = StateEncoding::Coordinates;
    cfg.network = NetworkSpec::parse(arch);
    cfg.range_lo = 0.0;
    cfg.range_hi = 8.0;
    cfg.total_timesteps = 50000;
    // Reduced-budget settings for the short runs: the buffer prefill is
    // scaled down with the timestep budget, and the horizon/sync pacing
    // is tightened so learning converges within the budget.
    cfg.learning_start = 8000;
    cfg.buffer_capacity = 100000;
    cfg.batch_size = 64;
    cfg.gamma = 0.95;
    cfg.sync_period = 150;
    cfg.learning_rate = 8e-4;
    cfg.seed = seed;
    return cfg;
}

struct MazeSweep {
    std::vector<double> avg_reward;  // per seed
    std::vector<double> tail_return;
};

MazeSweep maze_seeds(const std::string& arch) {
    MazeSweep sweep;
    for (std::size_t i = 0; i < kSeeds; ++i) {
        const DqnRunResult r = train_dqn(maze_config(arch, kBaseSeed + i));
        sweep.avg_reward.push_back(r.average_reward_per_timestep);
        sweep.tail_return.push_back(r.mean_return_tail(0.1));
        std::printf("  [maze arch=%s seed=%llu] avg reward/step %.5f, tail return %.2f\n",
                    arch.c_str(), static_cast<unsigned long long>(kBaseSeed + i),
                    sweep.avg_reward.back(), sweep.tail_return.back());
        std::fflush(stdout);
    }
    return sweep;
}

bool criterion_maze(double& urbf_seed0_out) {
    const MazeSweep mlp = maze_seeds("16");
    const MazeSweep urbf = maze_seeds("urbf:5,16");
    urbf_seed0_out = urbf.avg_reward.front();
    const double mlp_mean = mean_of(mlp.avg_reward);
    const double urbf_mean = mean_of(urbf.avg_reward);
    std::size_t positive = 0;
    for (double t : urbf.tail_return) positive += t > 0.0 ? 1 : 0;
    const bool pass = urbf_mean > mlp_mean && positive >= 4;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "mean reward/step: kernel agent %.5f vs dense agent %.5f; "
                  "positive tail returns %zu/%zu",
                  urbf_mean, mlp_mean, positive, kSeeds);
    report(6, pass, detail);
    return pass;
}

// ---------------------------------------------------------------- criterion 7
bool criterion_environment() {
    std::size_t mazes = 0;
    for (int level = 1; level <= 3; ++level) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const MazeInstance m = generate_maze(level, seed);
            if (m.pit_count != pit_count_for_level(level)) {
                report(7, false, "pit count mismatch");
                return false;
            }
            if (std::count(m.grid.begin(), m.grid.end(), Cell::Pit) != m.pit_count ||
                std::count(m.grid.begin(), m.grid.end(), Cell::Start) != 1 ||
                std::count(m.grid.begin(), m.grid.end(), Cell::Goal) != 1 ||
                !is_solvable(m)) {
                report(7, false, "structural invariant violated");
                return false;
            }
            const auto path = shortest_path(m);
            if (!path || path->size() > kMaxEpisodeSteps) {
                report(7, false, "no path within the step budget");
                return false;
            }
            EpisodeState s = initial_state(m);
            double total = 0.0;
            for (Action a : *path) {
                const StepResult r = step(m, s, a);
                total += r.reward;
                s = r.state;
            }
            if (!s.terminal || s.cause != TerminalCause::Goal || total != 100.0) {
                report(7, false, "optimal replay failed to reach the goal with +100");
                return false;
            }
            ++mazes;
        }
    }
    report(7, true, std::to_string(mazes) + " mazes solved optimally, all invariants hold");
    return true;
}

// ---------------------------------------------------------------- criterion 8
bool criterion_determinism(const std::vector<double>& urbf20,
                           double maze_urbf_seed0) {
    const double regression_rerun =
        regression_cell(TargetKind::Gaussian, 5, "urbf:20,32,64,128", kBaseSeed);
    const double maze_rerun =
        train_dqn(maze_config("urbf:5,16", kBaseSeed)).average_reward_per_timestep;
    const bool reg_ok = regression_rerun == urbf20.front();
    const bool maze_ok = maze_rerun == maze_urbf_seed0;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "regression rerun %s (%.17g vs %.17g); maze rerun %s (%.17g vs %.17g)",
                  reg_ok ? "bit-identical" : "DIFFERS", regression_rerun, urbf20.front(),
                  maze_ok ? "bit-identical" : "DIFFERS", maze_rerun, maze_urbf_seed0);
    const bool pass = reg_ok && maze_ok;
    report(8, pass, detail);
    return pass;
}

}  // namespace

int main() {
    bool all = true;
    all &= criterion_gradients();
    all &= criterion_properties();

    std::vector<double> urbf20_finals;
    all &= criterion_gaussian_ordering(urbf20_finals);
    all &= criterion_discontinuous();
    all &= criterion_nnpi_plateau(urbf20_finals);

    double maze_urbf_seed0 = 0.0;
    all &= criterion_maze(maze_urbf_seed0);
    all &= criterion_environment();
    all &= criterion_determinism(urbf20_finals, maze_urbf_seed0);

    std::printf("acceptance: %s\n", all ? "ALL PASS" : "FAILURES PRESENT");
    return all ? 0 : 1;
}
