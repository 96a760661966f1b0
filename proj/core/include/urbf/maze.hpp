#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urbf/tensor.hpp"

namespace urbf {

inline constexpr std::size_t kMazeSize = 9;
inline constexpr std::size_t kMaxEpisodeSteps = 100;

enum class Cell : std::uint8_t { Empty, Pit, Start, Goal };

struct GridPos {
    int row = 0;
    int col = 0;
    bool operator==(const GridPos&) const = default;
};

/// Immutable after generation; freely shareable.
struct MazeInstance {
    std::array<Cell, kMazeSize * kMazeSize> grid{};
    int level = 1;
    int pit_count = 0;
    GridPos start;
    GridPos goal;

    Cell at(int row, int col) const { return grid[static_cast<std::size_t>(row) * kMazeSize + col]; }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < static_cast<int>(kMazeSize) &&
               col >= 0 && col < static_cast<int>(kMazeSize);
    }
};

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kNumActions = 4;

enum class TerminalCause : std::uint8_t { None, Goal, Pit, Timeout };

struct EpisodeState {
    GridPos agent;
    std::size_t steps = 0;
    bool terminal = false;
    TerminalCause cause = TerminalCause::None;
};

int pit_count_for_level(int level);

/// Pits placed uniformly at random on non-start/goal cells, resampled
/// until a pit-free start-to-goal path exists. Deterministic per seed.
MazeInstance generate_maze(int level, std::uint64_t seed);

EpisodeState initial_state(const MazeInstance& maze);

struct StepResult {
    EpisodeState state;
    double reward = 0.0;
};

/// Off-grid moves leave the position unchanged with reward 0.
StepResult step(const MazeInstance& maze, const EpisodeState& state, Action action);

/// (col, row) as reals, both in [0, 8].
std::array<double, 2> encode_coordinates(const EpisodeState& state);

/// Row-major 81-vector with codes empty=0, pit=1, goal=2, vacated
/// start=3, agent=4; the agent code overrides the cell it occupies.
std::vector<double> encode_matrix(const MazeInstance& maze, const EpisodeState& state);

/// Shortest pit-free path from start to goal via breadth-first search,
/// or nullopt if the maze is unsolvable.
std::optional<std::vector<Action>> shortest_path(const MazeInstance& maze);

bool is_solvable(const MazeInstance& maze);

/// ASCII grid: `.` empty, `P` pit, `S` start, `G` goal, `A` agent.
std::string render(const MazeInstance& maze, const EpisodeState* state = nullptr);

}  // namespace urbf
