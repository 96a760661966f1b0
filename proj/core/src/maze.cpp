#include "urbf/maze.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>

namespace urbf {

namespace {

constexpr int kDeltaRow[] = {-1, 1, 0, 0};  // Up, Down, Left, Right
constexpr int kDeltaCol[] = {0, 0, -1, 1};

std::size_t cell_index(int row, int col) {
    return static_cast<std::size_t>(row) * kMazeSize + static_cast<std::size_t>(col);
}

}  // namespace

int pit_count_for_level(int level) {
    switch (level) {
        case 1: return 7;
        case 2: return 10;
        case 3: return 13;
        default: throw ContractError("maze level must be 1, 2, or 3");
    }
}

MazeInstance generate_maze(int level, std::uint64_t seed) {
    const int pits = pit_count_for_level(level);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> row_dist(0, static_cast<int>(kMazeSize) - 1);

    for (std::size_t attempt = 0; attempt < 10000; ++attempt) {
        MazeInstance maze;
        maze.level = level;
        maze.pit_count = pits;
        // Start in the left column, goal in the right column.
        maze.start = {row_dist(rng), 0};
        maze.goal = {row_dist(rng), static_cast<int>(kMazeSize) - 1};
        maze.grid.fill(Cell::Empty);
        maze.grid[cell_index(maze.start.row, maze.start.col)] = Cell::Start;
        maze.grid[cell_index(maze.goal.row, maze.goal.col)] = Cell::Goal;

        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < maze.grid.size(); ++i) {
            if (maze.grid[i] == Cell::Empty) candidates.push_back(i);
        }
        for (int p = 0; p < pits; ++p) {
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            const std::size_t chosen = pick(rng);
            maze.grid[candidates[chosen]] = Cell::Pit;
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(chosen));
        }
        if (is_solvable(maze)) return maze;
    }
    throw ContractError("generate_maze: no solvable maze after 10000 attempts");
}

EpisodeState initial_state(const MazeInstance& maze) {
    EpisodeState state;
    state.agent = maze.start;
    return state;
}

StepResult step(const MazeInstance& maze, const EpisodeState& state, Action action) {
    if (state.terminal) throw ContractError("step: episode already terminal");
    StepResult result;
    result.state = state;
    EpisodeState& next = result.state;

    const int a = static_cast<int>(action);
    const int nr = state.agent.row + kDeltaRow[a];
    const int nc = state.agent.col + kDeltaCol[a];
    if (maze.in_bounds(nr, nc)) next.agent = {nr, nc};
    next.steps = state.steps + 1;

    const Cell cell = maze.at(next.agent.row, next.agent.col);
    if (cell == Cell::Goal) {
        result.reward = 100.0;
        next.terminal = true;
        next.cause = TerminalCause::Goal;
    } else if (cell == Cell::Pit) {
        result.reward = -100.0;
        next.terminal = true;
        next.cause = TerminalCause::Pit;
    } else if (next.steps >= kMaxEpisodeSteps) {
        next.terminal = true;
        next.cause = TerminalCause::Timeout;
    }
    return result;
}

std::array<double, 2> encode_coordinates(const EpisodeState& state) {
    return {static_cast<double>(state.agent.col), static_cast<double>(state.agent.row)};
}

std::vector<double> encode_matrix(const MazeInstance& maze, const EpisodeState& state) {
    std::vector<double> out(kMazeSize * kMazeSize, 0.0);
    for (std::size_t i = 0; i < maze.grid.size(); ++i) {
        switch (maze.grid[i]) {
            case Cell::Empty: out[i] = 0.0; break;
            case Cell::Pit: out[i] = 1.0; break;
            case Cell::Goal: out[i] = 2.0; break;
            case Cell::Start: out[i] = 3.0; break;
        }
    }
    out[cell_index(state.agent.row, state.agent.col)] = 4.0;
    return out;
}

std::optional<std::vector<Action>> shortest_path(const MazeInstance& maze) {
    constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
    std::array<std::size_t, kMazeSize * kMazeSize> parent;
    std::array<int, kMazeSize * kMazeSize> parent_action;
    parent.fill(kUnvisited);
    parent_action.fill(-1);

    const std::size_t start = cell_index(maze.start.row, maze.start.col);
    const std::size_t goal = cell_index(maze.goal.row, maze.goal.col);
    std::deque<std::size_t> frontier{start};
    parent[start] = start;

    while (!frontier.empty()) {
        const std::size_t current = frontier.front();
        frontier.pop_front();
        if (current == goal) break;
        const int row = static_cast<int>(current / kMazeSize);
        const int col = static_cast<int>(current % kMazeSize);
        for (int a = 0; a < static_cast<int>(kNumActions); ++a) {
            const int nr = row + kDeltaRow[a];
            const int nc = col + kDeltaCol[a];
            if (!maze.in_bounds(nr, nc)) continue;
            if (maze.at(nr, nc) == Cell::Pit) continue;
            const std::size_t next = cell_index(nr, nc);
            if (parent[next] != kUnvisited) continue;
            parent[next] = current;
            parent_action[next] = a;
            frontier.push_back(next);
        }
    }

    if (parent[goal] == kUnvisited) return std::nullopt;
    std::vector<Action> path;
    for (std::size_t node = goal; node != start; node = parent[node]) {
        path.push_back(static_cast<Action>(parent_action[node]));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool is_solvable(const MazeInstance& maze) {
    return shortest_path(maze).has_value();
}

std::string render(const MazeInstance& maze, const EpisodeState* state) {
    std::ostringstream os;
    for (std::size_t r = 0; r < kMazeSize; ++r) {
        for (std::size_t c = 0; c < kMazeSize; ++c) {
            char ch = '.';
            switch (maze.grid[r * kMazeSize + c]) {
                case Cell::Empty: ch = '.'; break;
                case Cell::Pit: ch = 'P'; break;
                case Cell::Start: ch = 'S'; break;
                case Cell::Goal: ch = 'G'; break;
            }
            if (state && state->agent.row == static_cast<int>(r) &&
                state->agent.col == static_cast<int>(c)) {
                ch = 'A';
            }
            os << ch;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace urbf
