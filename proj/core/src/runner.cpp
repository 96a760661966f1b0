#include "urbf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace urbf {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ContractError("config: bad numeric value for '" + key + "': '" + value + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ContractError("config: bad integer value for '" + key + "': '" + value + "'");
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& is) {
    ExperimentConfig config;
    bool lr_set = false;
    bool range_set = false;
    bool batch_set = false;
    ArchConfig* current = nullptr;
    std::string line;
    while (std::getline(is, line)) {
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ContractError("config: empty section name");
            config.architectures.push_back(ArchConfig{name, {}, {}, {}, {}});
            current = &config.architectures.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ContractError("config: expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (current) {
            if (key == "layers") current->network = NetworkSpec::parse(value);
            else if (key == "learning_rate") current->learning_rate = to_double(key, value);
            else if (key == "range_lo") current->range_lo = to_double(key, value);
            else if (key == "range_hi") current->range_hi = to_double(key, value);
            else throw ContractError("config: unknown architecture key '" + key + "'");
            continue;
        }

        if (key == "task") config.task = value;
        else if (key == "kind") config.target_kind = target_kind_from_string(value);
        else if (key == "complexity") config.complexity = to_u64(key, value);
        else if (key == "epochs") config.epochs = to_u64(key, value);
        else if (key == "train_size") config.train_size = to_u64(key, value);
        else if (key == "test_size") config.test_size = to_u64(key, value);
        else if (key == "level") config.maze_level = static_cast<int>(to_u64(key, value));
        else if (key == "encoding") config.encoding = encoding_from_string(value);
        else if (key == "total_timesteps") config.total_timesteps = to_u64(key, value);
        else if (key == "learning_start") config.learning_start = to_u64(key, value);
        else if (key == "buffer_capacity") config.buffer_capacity = to_u64(key, value);
        else if (key == "sync_period") config.sync_period = to_u64(key, value);
        else if (key == "gamma") config.gamma = to_double(key, value);
        else if (key == "batch_size") { config.batch_size = to_u64(key, value); batch_set = true; }
        else if (key == "learning_rate") { config.learning_rate = to_double(key, value); lr_set = true; }
        else if (key == "range_lo") { config.range_lo = to_double(key, value); range_set = true; }
        else if (key == "range_hi") { config.range_hi = to_double(key, value); range_set = true; }
        else if (key == "spreads_learnable") config.spreads_learnable = value == "true" || value == "1";
        else if (key == "repetitions") config.repetitions = to_u64(key, value);
        else if (key == "base_seed") config.base_seed = to_u64(key, value);
        else if (key == "out_dir") config.out_dir = value;
        else throw ContractError("config: unknown key '" + key + "'");
    }
    if (config.task != "regression" && config.task != "maze") {
        throw ContractError("config: task must be 'regression' or 'maze'");
    }
    if (config.task == "maze") {
        // RL defaults from the experiment protocol.
        if (!lr_set) config.learning_rate = 8e-4;
        if (!range_set) {
            config.range_lo = 0.0;
            config.range_hi = 8.0;
        }
        if (!batch_set) config.batch_size = 64;
    }
    if (config.architectures.empty()) {
        throw ContractError("config: at least one [architecture] section required");
    }
    if (config.repetitions < 1) throw ContractError("config: repetitions must be >= 1");
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ContractError("config: cannot open '" + path + "'");
    return parse(is);
}

void ExperimentConfig::serialize(std::ostream& os) const {
    os << std::setprecision(17);
    os << "task = " << task << "\n";
    if (task == "regression") {
        os << "kind = " << to_string(target_kind) << "\n"
           << "complexity = " << complexity << "\n"
           << "epochs = " << epochs << "\n"
           << "train_size = " << train_size << "\n"
           << "test_size = " << test_size << "\n";
    } else {
        os << "level = " << maze_level << "\n"
           << "encoding = " << to_string(encoding) << "\n"
           << "total_timesteps = " << total_timesteps << "\n"
           << "learning_start = " << learning_start << "\n"
           << "buffer_capacity = " << buffer_capacity << "\n"
           << "sync_period = " << sync_period << "\n"
           << "gamma = " << gamma << "\n";
    }
    os << "batch_size = " << batch_size << "\n"
       << "learning_rate = " << learning_rate << "\n"
       << "range_lo = " << range_lo << "\n"
       << "range_hi = " << range_hi << "\n"
       << "spreads_learnable = " << (spreads_learnable ? "true" : "false") << "\n"
       << "repetitions = " << repetitions << "\n"
       << "base_seed = " << base_seed << "\n"
       << "out_dir = " << out_dir << "\n";
    for (const ArchConfig& arch : architectures) {
        os << "[" << arch.name << "]\n";
        os << "layers = " << arch.network.to_string() << "\n";
        if (arch.learning_rate) os << "learning_rate = " << *arch.learning_rate << "\n";
        if (arch.range_lo) os << "range_lo = " << *arch.range_lo << "\n";
        if (arch.range_hi) os << "range_hi = " << *arch.range_hi << "\n";
    }
}

void ExperimentConfig::validate() const {
    for (const ArchConfig& arch : architectures) {
        BuildOptions opts;
        opts.range_lo = arch.range_lo.value_or(range_lo);
        opts.range_hi = arch.range_hi.value_or(range_hi);
        opts.spreads_learnable = spreads_learnable;
        opts.seed = 0;
        Network::build(arch.network, task_input_dim(), task_output_dim(), opts);
    }
}

void ExperimentConfig::apply_desk_scale() {
    total_timesteps = std::min<std::uint64_t>(total_timesteps, 50000);
    // Scale the buffer prefill down with the timestep budget so the
    // exploration data is not stale by the time learning begins.
    learning_start = std::min<std::size_t>(learning_start, total_timesteps * 16 / 100);
    epochs = std::min<std::size_t>(epochs, 300);
    repetitions = std::min<std::size_t>(repetitions, 5);
}

std::uint64_t ExperimentConfig::fingerprint() const {
    std::ostringstream os;
    serialize(os);
    const std::string text = os.str();
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::size_t ExperimentConfig::task_input_dim() const {
    return task == "regression" ? 2 : encoding_width(encoding);
}

std::size_t ExperimentConfig::task_output_dim() const {
    return task == "regression" ? 1 : kNumActions;
}

std::size_t spec_nnpi(const NetworkSpec& spec) {
    for (const LayerDesc& desc : spec.hidden) {
        if (desc.kind == LayerDesc::Kind::Urbf) return desc.width;
    }
    return 0;
}

RunResult run_single(const ExperimentConfig& config, const ArchConfig& arch,
                     std::size_t repetition) {
    RunResult result;
    result.architecture = arch.name;
    result.config_fingerprint = config.fingerprint();
    result.repetition = repetition;
    result.seed = config.base_seed + repetition;
    result.task = config.task;
    result.axis_complexity = static_cast<double>(config.complexity);
    result.axis_nnpi = static_cast<double>(spec_nnpi(arch.network));

    const auto started = std::chrono::steady_clock::now();
    if (config.task == "regression") {
        std::mt19937_64 rng(result.seed);
        RegressionDataset data;
        if (config.target_kind == TargetKind::Gaussian) {
            const GaussianTarget target = sample_gaussian_target(config.complexity, rng);
            data = sample_dataset(target, config.train_size, config.test_size, rng);
        } else {
            const DiscontinuousTarget target = sample_discontinuous_target(config.complexity, rng);
            data = sample_dataset(target, config.train_size, config.test_size, rng);
        }
        RegressionTrainConfig train;
        train.epochs = config.epochs;
        train.batch_size = config.batch_size;
        train.learning_rate = arch.learning_rate.value_or(config.learning_rate);
        train.seed = result.seed;
        train.range_lo = arch.range_lo.value_or(config.range_lo);
        train.range_hi = arch.range_hi.value_or(config.range_hi);
        train.spreads_learnable = config.spreads_learnable;
        const RegressionTrainResult r = train_regression(arch.network, data, train);
        result.final_metric = r.final_test_mse;
        result.parameter_count = r.parameter_count;
        result.trace.reserve(r.test_mse.size());
        for (std::size_t e = 0; e < r.test_mse.size(); ++e) {
            result.trace.emplace_back(static_cast<double>(e), r.test_mse[e]);
        }
    } else {
        DqnConfig dqn;
        dqn.maze_level = config.maze_level;
        dqn.encoding = config.encoding;
        dqn.network = arch.network;
        dqn.range_lo = arch.range_lo.value_or(config.range_lo);
        dqn.range_hi = arch.range_hi.value_or(config.range_hi);
        dqn.spreads_learnable = config.spreads_learnable;
        dqn.total_timesteps = config.total_timesteps;
        dqn.learning_start = config.learning_start;
        dqn.buffer_capacity = config.buffer_capacity;
        dqn.batch_size = config.batch_size;
        dqn.gamma = config.gamma;
        dqn.sync_period = config.sync_period;
        dqn.learning_rate = arch.learning_rate.value_or(config.learning_rate);
        dqn.seed = result.seed;
        const DqnRunResult r = train_dqn(dqn);
        result.final_metric = r.average_reward_per_timestep;
        result.parameter_count = r.parameter_count;
        result.trace.reserve(r.episodes.size());
        for (const EpisodeRecord& e : r.episodes) {
            result.trace.emplace_back(static_cast<double>(e.end_timestep), e.episode_return);
        }
    }
    result.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    {
        std::ofstream probe(std::filesystem::path(config.out_dir) / ".write_probe");
        if (!probe) throw ContractError("run_experiment: output directory not writable: " + config.out_dir);
    }
    std::filesystem::remove(std::filesystem::path(config.out_dir) / ".write_probe");

    std::vector<RunResult> results;
    for (const ArchConfig& arch : config.architectures) {
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            RunResult result;
            try {
                result = run_single(config, arch, rep);
            } catch (const std::exception& e) {
                result.architecture = arch.name;
                result.config_fingerprint = config.fingerprint();
                result.repetition = rep;
                result.seed = config.base_seed + rep;
                result.failed = true;
                result.error = e.what();
            }
            save_run_result(result, config, config.out_dir);
            results.push_back(std::move(result));
        }
    }
    return results;
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw ContractError("aggregate: empty input");
    Aggregate agg;
    agg.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return agg;
}

void emit_plot_data(const std::vector<AggregateRecord>& records,
                    const std::string& axis_name, std::ostream& os) {
    if (records.empty()) throw ContractError("emit_plot_data: empty aggregate set");
    const std::string& task = records.front().task;
    for (const AggregateRecord& r : records) {
        if (r.task != task) throw ContractError("emit_plot_data: mixed tasks in one emission");
    }
    std::vector<AggregateRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.architecture != b.architecture) return a.architecture < b.architecture;
        return a.axis_value < b.axis_value;
    });
    os << std::setprecision(17);
    os << "# task=" << task << " std_divisor=N\n";
    os << "architecture," << axis_name << ",mean,std,count\n";
    for (const AggregateRecord& r : sorted) {
        os << r.architecture << "," << r.axis_value << "," << r.stats.mean << ","
           << r.stats.stddev << "," << r.stats.count << "\n";
    }
}

namespace {

std::string run_basename(const RunResult& result) {
    return result.architecture + "_rep" + std::to_string(result.repetition);
}

}  // namespace

void save_run_result(const RunResult& result, const ExperimentConfig& config,
                     const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / run_basename(result);

    std::ofstream meta(base.string() + ".meta");
    if (!meta) throw ContractError("save_run_result: cannot write " + base.string() + ".meta");
    meta << std::setprecision(17);
    meta << "fingerprint = " << std::hex << result.config_fingerprint << std::dec << "\n"
         << "task = " << config.task << "\n"
         << "architecture = " << result.architecture << "\n"
         << "repetition = " << result.repetition << "\n"
         << "seed = " << result.seed << "\n"
         << "status = " << (result.failed ? "failed" : "ok") << "\n"
         << "final_metric = " << result.final_metric << "\n"
         << "parameter_count = " << result.parameter_count << "\n"
         << "duration_seconds = " << result.duration_seconds << "\n";
    meta << "axis_complexity = " << result.axis_complexity << "\n"
         << "axis_nnpi = " << result.axis_nnpi << "\n";
    if (result.failed) meta << "error = " << result.error << "\n";

    std::ofstream trace(base.string() + ".csv");
    if (!trace) throw ContractError("save_run_result: cannot write " + base.string() + ".csv");
    trace << std::setprecision(17);
    trace << "x,y\n";
    for (const auto& [x, y] : result.trace) trace << x << "," << y << "\n";
}

std::vector<RunResult> load_run_results(const std::string& dir) {
    std::vector<RunResult> results;
    std::vector<std::filesystem::path> metas;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".meta") metas.push_back(entry.path());
    }
    std::sort(metas.begin(), metas.end());
    for (const auto& path : metas) {
        RunResult result;
        std::ifstream meta(path);
        std::string line;
        std::map<std::string, std::string> kv;
        while (std::getline(meta, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        result.architecture = kv["architecture"];
        result.config_fingerprint = std::stoull(kv["fingerprint"], nullptr, 16);
        result.repetition = std::stoull(kv["repetition"]);
        result.seed = std::stoull(kv["seed"]);
        result.failed = kv["status"] == "failed";
        result.final_metric = std::stod(kv["final_metric"]);
        result.parameter_count = std::stoull(kv["parameter_count"]);
        result.duration_seconds = std::stod(kv["duration_seconds"]);
        result.task = kv["task"];
        result.axis_complexity = kv.count("axis_complexity") ? std::stod(kv["axis_complexity"]) : 0.0;
        result.axis_nnpi = kv.count("axis_nnpi") ? std::stod(kv["axis_nnpi"]) : 0.0;
        result.error = kv.count("error") ? kv["error"] : "";

        std::filesystem::path csv = path;
        csv.replace_extension(".csv");
        std::ifstream trace(csv);
        if (trace) {
            std::getline(trace, line);  // header
            while (std::getline(trace, line)) {
                if (line.empty()) continue;
                const auto comma = line.find(',');
                result.trace.emplace_back(std::stod(line.substr(0, comma)),
                                          std::stod(line.substr(comma + 1)));
            }
        }
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace urbf
