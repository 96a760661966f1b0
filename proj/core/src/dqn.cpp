#include "urbf/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace urbf {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ContractError("ReplayBuffer: zero capacity");
    storage_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
    if (size_ < capacity_) {
        storage_.push_back(std::move(t));
        ++size_;
    } else {
        storage_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
    if (size_ == 0) throw ContractError("ReplayBuffer: sample from empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    return storage_[pick(rng)];
}

double EpsilonSchedule::at(std::uint64_t t) const {
    const double ramp_steps = exploration_fraction * static_cast<double>(total_timesteps);
    if (ramp_steps <= 0.0 || static_cast<double>(t) >= ramp_steps) return eps_final;
    const double frac = static_cast<double>(t) / ramp_steps;
    return eps_start + frac * (eps_final - eps_start);
}

StateEncoding encoding_from_string(const std::string& s) {
    if (s == "coordinates") return StateEncoding::Coordinates;
    if (s == "matrix") return StateEncoding::Matrix;
    throw ContractError("unknown state encoding '" + s + "'");
}

std::string to_string(StateEncoding e) {
    return e == StateEncoding::Coordinates ? "coordinates" : "matrix";
}

std::size_t encoding_width(StateEncoding e) {
    return e == StateEncoding::Coordinates ? 2 : kMazeSize * kMazeSize;
}

std::vector<double> encode_state(StateEncoding e, const MazeInstance& maze,
                                 const EpisodeState& state) {
    if (e == StateEncoding::Coordinates) {
        const auto xy = encode_coordinates(state);
        return {xy[0], xy[1]};
    }
    return encode_matrix(maze, state);
}

DqnAgent::DqnAgent(const NetworkSpec& spec, std::size_t input_dim, const DqnConfig& config)
    : config_(config),
      online_(Network::build(spec, input_dim, kNumActions,
                             BuildOptions{config.range_lo, config.range_hi,
                                          config.spreads_learnable, config.seed})),
      target_((zero_head(online_), online_.clone())),
      adam_(online_.parameters(),
            AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8}) {}

/// Zeroes the output head so all initial Q-values are exactly zero: the
/// untrained greedy policy is then unbiased instead of drifting in an
/// arbitrary init-dependent direction during early exploration.
void DqnAgent::zero_head(Network& net) {
    const AffineLayer& head = net.affine_layers().back();
    std::fill(head.weights->values().begin(), head.weights->values().end(), 0.0);
    std::fill(head.bias->values().begin(), head.bias->values().end(), 0.0);
}

Action DqnAgent::select_action(const std::vector<double>& encoding, double epsilon,
                               std::mt19937_64& rng) const {
    if (epsilon < 0.0 || epsilon > 1.0) throw ContractError("select_action: epsilon out of [0,1]");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(kNumActions) - 1);
        return static_cast<Action>(pick(rng));
    }
    const std::vector<double> q = online_.predict(encoding);
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a) {
        if (q[a] > q[best]) best = a;  // ties keep the lowest index
    }
    return static_cast<Action>(best);
}

std::vector<double> DqnAgent::td_targets(const std::vector<const Transition*>& batch) const {
    if (batch.empty()) throw ContractError("td_targets: empty batch");
    const std::size_t n = batch.size();
    const std::size_t width = batch.front()->state.size();

    std::vector<double> targets(n);
    std::vector<double> next_states;
    std::vector<std::size_t> bootstrap_rows;
    for (std::size_t i = 0; i < n; ++i) {
        targets[i] = batch[i]->reward;
        if (!batch[i]->terminal) {
            next_states.insert(next_states.end(), batch[i]->next_state.begin(),
                               batch[i]->next_state.end());
            bootstrap_rows.push_back(i);
        }
    }
    if (!bootstrap_rows.empty()) {
        Graph g;
        NodeId x = g.leaf(Tensor::from({bootstrap_rows.size(), width}, std::move(next_states)));
        const Tensor& q = g.value(target_.forward(g, x));
        for (std::size_t r = 0; r < bootstrap_rows.size(); ++r) {
            double best = q.at(r, 0);
            for (std::size_t a = 1; a < kNumActions; ++a) best = std::max(best, q.at(r, a));
            targets[bootstrap_rows[r]] += config_.gamma * best;
        }
    }
    return targets;
}

std::optional<double> DqnAgent::train_step(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    if (buffer.size() < config_.learning_start || buffer.size() < config_.batch_size) {
        return std::nullopt;
    }
    const std::size_t n = config_.batch_size;
    std::vector<const Transition*> batch(n);
    for (std::size_t i = 0; i < n; ++i) batch[i] = &buffer.sample(rng);

    const std::size_t width = batch.front()->state.size();
    std::vector<double> states(n * width);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(batch[i]->state.begin(), batch[i]->state.end(), states.begin() + i * width);
    }
    const std::vector<double> targets = td_targets(batch);

    // One-hot action mask: the squared error is taken on the chosen
    // action's Q-value only.
    std::vector<double> mask(n * kNumActions, 0.0);
    std::vector<double> target_matrix(n * kNumActions, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i * kNumActions + static_cast<std::size_t>(batch[i]->action)] = 1.0;
        target_matrix[i * kNumActions + static_cast<std::size_t>(batch[i]->action)] = targets[i];
    }

    Graph g;
    NodeId x = g.leaf(Tensor::from({n, width}, std::move(states)));
    NodeId q = online_.forward(g, x);
    NodeId t = g.leaf(Tensor::from({n, kNumActions}, std::move(target_matrix)));
    NodeId m = g.leaf(Tensor::from({n, kNumActions}, std::move(mask)));
    NodeId masked = g.multiply(g.subtract(q, t), m);
    NodeId loss = g.divide(g.sum(g.square(masked)),
                           g.leaf(Tensor::scalar(static_cast<double>(n))));
    const double loss_value = g.value(loss)[0];
    adam_.zero_grad();
    g.backward(loss);
    adam_.step();
    online_.project_constraints();
    return loss_value;
}

void DqnAgent::sync_target() {
    target_.copy_parameters_from(online_);
}

double DqnRunResult::mean_return_tail(double fraction) const {
    if (episodes.empty()) return 0.0;
    const std::size_t count = std::max<std::size_t>(
        1, static_cast<std::size_t>(fraction * static_cast<double>(episodes.size())));
    double sum = 0.0;
    for (std::size_t i = episodes.size() - count; i < episodes.size(); ++i) {
        sum += episodes[i].episode_return;
    }
    return sum / static_cast<double>(count);
}

DqnRunResult train_dqn(const DqnConfig& config, const std::string& episode_log_path) {
    std::mt19937_64 rng(config.seed);
    const MazeInstance maze = generate_maze(config.maze_level, config.seed);
    const std::size_t input_dim = encoding_width(config.encoding);

    DqnAgent agent(config.network, input_dim, config);
    ReplayBuffer buffer(config.buffer_capacity);
    EpsilonSchedule schedule{1.0, 0.02, 0.1, config.total_timesteps};

    std::ofstream log;
    if (!episode_log_path.empty()) {
        log.open(episode_log_path, std::ios::app);
        if (!log) throw ContractError("train_dqn: cannot open episode log " + episode_log_path);
        log << "episode_index,end_timestep,return,epsilon\n";
    }

    DqnRunResult result;
    result.parameter_count = agent.parameter_count();

    EpisodeState state = initial_state(maze);
    std::vector<double> encoding = encode_state(config.encoding, maze, state);
    double episode_return = 0.0;
    double total_reward = 0.0;
    std::size_t episode_index = 0;

    for (std::uint64_t t = 0; t < config.total_timesteps; ++t) {
        const double eps = schedule.at(t);
        const Action action = agent.select_action(encoding, eps, rng);
        const StepResult sr = step(maze, state, action);
        std::vector<double> next_encoding = encode_state(config.encoding, maze, sr.state);

        // A timeout ends the episode but is not a true environment
        // terminal: the stored transition stays bootstrappable so the
        // step budget does not anchor arbitrary states to zero value.
        const bool env_terminal =
            sr.state.terminal && sr.state.cause != TerminalCause::Timeout;
        buffer.push(Transition{encoding, static_cast<int>(action), sr.reward,
                               next_encoding, env_terminal});
        episode_return += sr.reward;
        total_reward += sr.reward;

        const auto loss = agent.train_step(buffer, rng);
        if (loss && !std::isfinite(*loss)) {
            throw ContractError("train_dqn: non-finite loss at timestep " + std::to_string(t));
        }
        if ((t + 1) % config.sync_period == 0) agent.sync_target();

        if (sr.state.terminal) {
            EpisodeRecord rec{episode_index, t, episode_return, eps};
            result.episodes.push_back(rec);
            if (log) {
                log << rec.episode_index << "," << rec.end_timestep << ","
                    << rec.episode_return << "," << rec.epsilon << "\n";
            }
            ++episode_index;
            episode_return = 0.0;
            state = initial_state(maze);
            encoding = encode_state(config.encoding, maze, state);
        } else {
            state = sr.state;
            encoding = std::move(next_encoding);
        }
    }

    result.average_reward_per_timestep =
        total_reward / static_cast<double>(config.total_timesteps);
    return result;
}

}  // namespace urbf
