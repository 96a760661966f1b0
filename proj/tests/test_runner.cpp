#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "urbf/runner.hpp"

using namespace urbf;

namespace {

const char* kSmallRegressionConfig = R"(
# function-regression comparison, shrunk for tests
task = regression
kind = gaussian
complexity = 1
epochs = 3
train_size = 128
test_size = 32
batch_size = 32
learning_rate = 1e-3
repetitions = 2
base_seed = 7
out_dir = /tmp/urbf_runner_test

[mlp]
layers = 8

[urbf]
layers = urbf:4,8
)";

ExperimentConfig small_config() {
    std::istringstream is(kSmallRegressionConfig);
    return ExperimentConfig::parse(is);
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing reads globals and architecture sections") {
    const ExperimentConfig config = small_config();
    CHECK(config.task == "regression");
    CHECK(config.target_kind == TargetKind::Gaussian);
    CHECK(config.complexity == 1);
    CHECK(config.epochs == 3);
    CHECK(config.train_size == 128);
    CHECK(config.test_size == 32);
    CHECK(config.batch_size == 32);
    CHECK(config.learning_rate == 1e-3);
    CHECK(config.repetitions == 2);
    CHECK(config.base_seed == 7);
    REQUIRE(config.architectures.size() == 2);
    CHECK(config.architectures[0].name == "mlp");
    CHECK(config.architectures[0].network == NetworkSpec::parse("8"));
    CHECK(config.architectures[1].name == "urbf");
    CHECK(config.architectures[1].network == NetworkSpec::parse("urbf:4,8"));
}

TEST_CASE("maze configs default to the RL protocol settings") {
    std::istringstream is(R"(
task = maze
level = 1
encoding = coordinates
total_timesteps = 1000
[agent]
layers = urbf:4,16
)");
    const ExperimentConfig config = ExperimentConfig::parse(is);
    CHECK(config.learning_rate == 8e-4);
    CHECK(config.range_lo == 0.0);
    CHECK(config.range_hi == 8.0);
    CHECK(config.batch_size == 64);
    CHECK(config.task_input_dim() == 2);
    CHECK(config.task_output_dim() == 4);
}

TEST_CASE("invalid configs are rejected before any run") {
    auto parse = [](const std::string& text) {
        std::istringstream is(text);
        return ExperimentConfig::parse(is);
    };
    CHECK_THROWS_AS(parse("task = tetris\n[a]\nlayers = 8\n"), ContractError);
    CHECK_THROWS_AS(parse("task = regression\n"), ContractError);  // no architectures
    CHECK_THROWS_AS(parse("task = regression\nbogus_key = 1\n[a]\nlayers = 8\n"), ContractError);
    CHECK_THROWS_AS(parse("task = regression\nepochs = banana\n[a]\nlayers = 8\n"), ContractError);
    CHECK_THROWS_AS(parse("task = regression\nrepetitions = 0\n[a]\nlayers = 8\n"), ContractError);
    CHECK_THROWS_AS(parse("task = regression\n[a]\nlayers = urbf:0,8\n"), ContractError);
}

TEST_CASE("config round-trips through serialize and parse") {
    const ExperimentConfig config = small_config();
    std::stringstream ss;
    config.serialize(ss);
    const ExperimentConfig reparsed = ExperimentConfig::parse(ss);
    CHECK(reparsed.fingerprint() == config.fingerprint());
    CHECK(reparsed.task == config.task);
    CHECK(reparsed.architectures.size() == config.architectures.size());
    CHECK(reparsed.architectures[1].network == config.architectures[1].network);
}

TEST_CASE("fingerprints distinguish configs and ignore nothing meaningful") {
    ExperimentConfig a = small_config();
    ExperimentConfig b = small_config();
    CHECK(a.fingerprint() == b.fingerprint());
    b.base_seed += 1;
    CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("aggregate computes population statistics") {
    const Aggregate single = aggregate({4.5});
    CHECK(single.mean == 4.5);
    CHECK(single.stddev == 0.0);
    CHECK(single.count == 1);

    const Aggregate two = aggregate({1.0, 3.0});
    CHECK(two.mean == 2.0);
    CHECK(two.stddev == 1.0);

    const Aggregate eight = aggregate({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(eight.mean == 5.0);
    CHECK(eight.stddev == 2.0);
    CHECK(eight.count == 8);

    CHECK_THROWS_AS(aggregate({}), ContractError);
}

TEST_CASE("plot emission sorts by axis and rejects mixed tasks") {
    std::vector<AggregateRecord> records = {
        {"regression", "urbf", 40.0, {0.5, 0.1, 5}},
        {"regression", "urbf", 5.0, {0.7, 0.2, 5}},
    };
    std::ostringstream os;
    emit_plot_data(records, "nnpi", os);
    const std::string text = os.str();
    CHECK(text.find("architecture,nnpi,mean,std,count") != std::string::npos);
    CHECK(text.find("urbf,5,") < text.find("urbf,40,"));

    records[1].task = "maze";
    std::ostringstream bad;
    CHECK_THROWS_AS(emit_plot_data(records, "nnpi", bad), ContractError);
    CHECK_THROWS_AS(emit_plot_data({}, "nnpi", bad), ContractError);
}

TEST_CASE("experiments run every architecture and repetition with derived seeds") {
    TempDir dir("urbf_runner_exp");
    ExperimentConfig config = small_config();
    config.out_dir = dir.path.string();

    const std::vector<RunResult> results = run_experiment(config);
    REQUIRE(results.size() == 4);  // 2 architectures x 2 repetitions
    std::set<std::uint64_t> seeds;
    for (const RunResult& r : results) {
        CHECK_FALSE(r.failed);
        CHECK(r.config_fingerprint == config.fingerprint());
        CHECK(r.trace.size() == config.epochs);
        CHECK(r.parameter_count > 0);
        seeds.insert(r.seed);
    }
    CHECK(seeds == std::set<std::uint64_t>{7, 8});

    // Reload from disk and confirm bit-identical aggregation inputs.
    const std::vector<RunResult> loaded = load_run_results(config.out_dir);
    REQUIRE(loaded.size() == results.size());
    std::vector<double> direct, reloaded;
    for (const RunResult& r : results) direct.push_back(r.final_metric);
    for (const RunResult& r : loaded) reloaded.push_back(r.final_metric);
    std::sort(direct.begin(), direct.end());
    std::sort(reloaded.begin(), reloaded.end());
    CHECK(direct == reloaded);
    const Aggregate a = aggregate(direct);
    const Aggregate b = aggregate(reloaded);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);

    // Traces persist losslessly too.
    for (const RunResult& r : results) {
        for (const RunResult& l : loaded) {
            if (l.architecture == r.architecture && l.repetition == r.repetition) {
                CHECK(l.trace == r.trace);
                CHECK(l.final_metric == r.final_metric);
                CHECK(l.seed == r.seed);
            }
        }
    }
}

TEST_CASE("identical configs reproduce identical final metrics") {
    TempDir dir1("urbf_runner_rep1");
    TempDir dir2("urbf_runner_rep2");
    ExperimentConfig config = small_config();
    config.repetitions = 1;

    config.out_dir = dir1.path.string();
    const auto first = run_experiment(config);
    config.out_dir = dir2.path.string();
    const auto second = run_experiment(config);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].final_metric == second[i].final_metric);
        CHECK(first[i].trace == second[i].trace);
    }
}

TEST_CASE("a single repetition produces exactly one result") {
    TempDir dir("urbf_runner_single");
    ExperimentConfig config = small_config();
    config.repetitions = 1;
    config.architectures.resize(1);
    config.out_dir = dir.path.string();
    CHECK(run_experiment(config).size() == 1);
}

TEST_CASE("nnpi extraction reads the first kernel layer") {
    CHECK(spec_nnpi(NetworkSpec::parse("urbf:20,32,64,128")) == 20);
    CHECK(spec_nnpi(NetworkSpec::parse("32,64,128")) == 0);
    CHECK(spec_nnpi(NetworkSpec::parse("16,urbf:7,8")) == 7);
}

TEST_CASE("desk scale caps the heavy budgets") {
    std::istringstream is(R"(
task = maze
level = 1
encoding = coordinates
total_timesteps = 150000
repetitions = 10
[agent]
layers = urbf:4,16
)");
    ExperimentConfig config = ExperimentConfig::parse(is);
    config.apply_desk_scale();
    CHECK(config.total_timesteps == 50000);
    CHECK(config.repetitions == 5);
    CHECK(config.learning_start == 8000);
}
