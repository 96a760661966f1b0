#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "urbf/layers.hpp"
#include "urbf/maze.hpp"
#include "urbf/optim.hpp"

namespace urbf {

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// Ring buffer; once full, the oldest entries are overwritten in
/// insertion order.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }

    const Transition& sample(std::mt19937_64& rng) const;
    const Transition& at(std::size_t i) const { return storage_[i]; }

private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
};

struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_final = 0.02;
    double exploration_fraction = 0.1;
    std::uint64_t total_timesteps = 0;

    /// Linear ramp from eps_start at t=0 to eps_final at
    /// t = exploration_fraction * total_timesteps, constant after.
    double at(std::uint64_t t) const;
};

enum class StateEncoding { Coordinates, Matrix };

StateEncoding encoding_from_string(const std::string& s);
std::string to_string(StateEncoding e);
std::size_t encoding_width(StateEncoding e);
std::vector<double> encode_state(StateEncoding e, const MazeInstance& maze,
                                 const EpisodeState& state);

struct DqnConfig {
    int maze_level = 1;
    StateEncoding encoding = StateEncoding::Coordinates;
    NetworkSpec network;
    double range_lo = 0.0;
    double range_hi = 8.0;
    bool spreads_learnable = true;
    std::uint64_t total_timesteps = 50000;
    std::size_t learning_start = 30000;
    std::size_t buffer_capacity = 100000;
    std::size_t batch_size = 64;
    double gamma = 0.99;
    std::size_t sync_period = 1000;
    double learning_rate = 8e-4;
    std::uint64_t seed = 0;
};

/// Online network, frozen target copy, and the optimizer state; the
/// target changes only through sync_target().
class DqnAgent {
public:
    DqnAgent(const NetworkSpec& spec, std::size_t input_dim, const DqnConfig& config);

    Action select_action(const std::vector<double>& encoding, double epsilon,
                         std::mt19937_64& rng) const;

    /// r + gamma * max_a' Qbar(s',a') for non-terminal transitions, r
    /// otherwise; evaluated with the frozen target network.
    std::vector<double> td_targets(const std::vector<const Transition*>& batch) const;

    /// One Adam step on the online parameters from a uniform batch.
    /// Returns nullopt before the learning-start threshold.
    std::optional<double> train_step(const ReplayBuffer& buffer, std::mt19937_64& rng);

    void sync_target();

    const Network& online() const { return online_; }
    const Network& target() const { return target_; }
    std::size_t parameter_count() const { return online_.parameter_count(); }

private:
    static void zero_head(Network& net);

    DqnConfig config_;
    Network online_;
    Network target_;
    Adam adam_;
};

struct EpisodeRecord {
    std::size_t episode_index = 0;
    std::uint64_t end_timestep = 0;
    double episode_return = 0.0;
    double epsilon = 0.0;
};

struct DqnRunResult {
    std::vector<EpisodeRecord> episodes;
    double average_reward_per_timestep = 0.0;
    std::size_t parameter_count = 0;

    /// Mean return over the final `fraction` of completed episodes.
    double mean_return_tail(double fraction) const;
};

/// Full interaction loop: act, store, train after learning start, hard
/// target sync every sync_period steps. When `episode_log_path` is
/// non-empty, appends one "episode_index,end_timestep,return,epsilon"
/// line per finished episode.
DqnRunResult train_dqn(const DqnConfig& config, const std::string& episode_log_path = "");

}  // namespace urbf
