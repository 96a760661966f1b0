#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>

#include "urbf/maze.hpp"

using namespace urbf;

namespace {

/// Open 9x9 grid with start/goal placed explicitly, no pits unless added.
MazeInstance open_maze(GridPos start, GridPos goal) {
    MazeInstance m;
    m.grid.fill(Cell::Empty);
    m.level = 1;
    m.pit_count = 0;
    m.start = start;
    m.goal = goal;
    m.grid[static_cast<std::size_t>(start.row) * kMazeSize + start.col] = Cell::Start;
    m.grid[static_cast<std::size_t>(goal.row) * kMazeSize + goal.col] = Cell::Goal;
    return m;
}

void add_pit(MazeInstance& m, int row, int col) {
    m.grid[static_cast<std::size_t>(row) * kMazeSize + col] = Cell::Pit;
    ++m.pit_count;
}

}  // namespace

TEST_CASE("pit counts follow the level") {
    CHECK(pit_count_for_level(1) == 7);
    CHECK(pit_count_for_level(2) == 10);
    CHECK(pit_count_for_level(3) == 13);
    CHECK_THROWS_AS(pit_count_for_level(0), ContractError);
    CHECK_THROWS_AS(pit_count_for_level(4), ContractError);

    const MazeInstance easy = generate_maze(1, 0);
    const MazeInstance hard = generate_maze(3, 0);
    CHECK(std::count(easy.grid.begin(), easy.grid.end(), Cell::Pit) == 7);
    CHECK(std::count(hard.grid.begin(), hard.grid.end(), Cell::Pit) == 13);
}

TEST_CASE("generation is deterministic per seed") {
    for (int level : {1, 2, 3}) {
        const MazeInstance a = generate_maze(level, 123);
        const MazeInstance b = generate_maze(level, 123);
        CHECK(a.grid == b.grid);
        CHECK(a.start == b.start);
        CHECK(a.goal == b.goal);
        const MazeInstance c = generate_maze(level, 124);
        CHECK(a.grid != c.grid);  // overwhelmingly likely for distinct seeds
    }
}

TEST_CASE("generated mazes satisfy the structural invariants") {
    for (int level : {1, 2, 3}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const MazeInstance m = generate_maze(level, seed);
            REQUIRE(m.level == level);
            REQUIRE(m.pit_count == pit_count_for_level(level));
            REQUIRE(std::count(m.grid.begin(), m.grid.end(), Cell::Pit) == m.pit_count);
            REQUIRE(std::count(m.grid.begin(), m.grid.end(), Cell::Start) == 1);
            REQUIRE(std::count(m.grid.begin(), m.grid.end(), Cell::Goal) == 1);
            REQUIRE(m.start != m.goal);
            REQUIRE(m.start.col == 0);
            REQUIRE(m.goal.col == static_cast<int>(kMazeSize) - 1);
            REQUIRE(m.at(m.start.row, m.start.col) == Cell::Start);
            REQUIRE(m.at(m.goal.row, m.goal.col) == Cell::Goal);
            REQUIRE(is_solvable(m));
        }
    }
}

TEST_CASE("moving into the goal terminates with +100") {
    const MazeInstance m = open_maze({4, 0}, {4, 8});
    EpisodeState s = initial_state(m);
    s.agent = {4, 7};
    const StepResult r = step(m, s, Action::Right);
    CHECK(r.reward == 100.0);
    CHECK(r.state.terminal);
    CHECK(r.state.cause == TerminalCause::Goal);
    CHECK(r.state.agent == GridPos{4, 8});
}

TEST_CASE("moving into a pit terminates with -100") {
    MazeInstance m = open_maze({0, 0}, {8, 8});
    add_pit(m, 1, 0);
    const EpisodeState s = initial_state(m);
    const StepResult r = step(m, s, Action::Down);
    CHECK(r.reward == -100.0);
    CHECK(r.state.terminal);
    CHECK(r.state.cause == TerminalCause::Pit);
}

TEST_CASE("off-grid moves are absorbed with zero reward") {
    const MazeInstance m = open_maze({0, 0}, {8, 8});
    const EpisodeState s = initial_state(m);
    for (Action a : {Action::Up, Action::Left}) {
        const StepResult r = step(m, s, a);
        CHECK(r.reward == 0.0);
        CHECK_FALSE(r.state.terminal);
        CHECK(r.state.agent == s.agent);
        CHECK(r.state.steps == 1);
    }
}

TEST_CASE("the step budget forces a timeout terminal") {
    const MazeInstance m = open_maze({0, 0}, {8, 8});
    EpisodeState s = initial_state(m);
    for (std::size_t i = 0; i < kMaxEpisodeSteps; ++i) {
        REQUIRE_FALSE(s.terminal);
        s = step(m, s, Action::Up).state;  // bounce off the wall forever
    }
    CHECK(s.terminal);
    CHECK(s.cause == TerminalCause::Timeout);
    CHECK(s.steps == kMaxEpisodeSteps);
    CHECK_THROWS_AS(step(m, s, Action::Down), ContractError);
}

TEST_CASE("step does not mutate the maze") {
    MazeInstance m = open_maze({2, 0}, {2, 8});
    add_pit(m, 5, 5);
    const MazeInstance copy = m;
    EpisodeState s = initial_state(m);
    for (int i = 0; i < 5; ++i) s = step(m, s, Action::Right).state;
    CHECK(m.grid == copy.grid);
}

TEST_CASE("coordinate encoding is (col, row) within [0, 8]") {
    const MazeInstance m = open_maze({0, 0}, {8, 8});
    EpisodeState s = initial_state(m);
    CHECK(encode_coordinates(s) == std::array<double, 2>{0.0, 0.0});
    s.agent = {8, 8};
    CHECK(encode_coordinates(s) == std::array<double, 2>{8.0, 8.0});
    s.agent = {3, 6};
    CHECK(encode_coordinates(s) == std::array<double, 2>{6.0, 3.0});

    // Every reachable position stays inside the kernel init range [0, 8].
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const MazeInstance maze = generate_maze(2, seed);
        EpisodeState state = initial_state(maze);
        std::mt19937_64 rng(seed);
        while (!state.terminal) {
            const auto xy = encode_coordinates(state);
            REQUIRE(xy[0] >= 0.0);
            REQUIRE(xy[0] <= 8.0);
            REQUIRE(xy[1] >= 0.0);
            REQUIRE(xy[1] <= 8.0);
            state = step(maze, state, static_cast<Action>(rng() % kNumActions)).state;
        }
    }
}

TEST_CASE("matrix encoding uses codes 0..4 with a single agent cell") {
    const MazeInstance m = generate_maze(3, 77);
    EpisodeState s = initial_state(m);
    const std::vector<double> at_start = encode_matrix(m, s);
    REQUIRE(at_start.size() == 81);
    CHECK(std::count(at_start.begin(), at_start.end(), 4.0) == 1);
    // Agent on the start cell: the agent code overrides the start code.
    CHECK(at_start[static_cast<std::size_t>(m.start.row) * kMazeSize + m.start.col] == 4.0);
    CHECK(std::count(at_start.begin(), at_start.end(), 1.0) == m.pit_count);
    CHECK(std::count(at_start.begin(), at_start.end(), 2.0) == 1);

    // Move off the start (downward from a non-bottom row, or up otherwise).
    const Action away = m.start.row < 8 ? Action::Down : Action::Up;
    s = step(m, s, away).state;
    const std::vector<double> moved = encode_matrix(m, s);
    for (double v : moved) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 4.0);
    }
    if (s.agent != m.start) {
        CHECK(moved[static_cast<std::size_t>(m.start.row) * kMazeSize + m.start.col] == 3.0);
        CHECK(std::count(moved.begin(), moved.end(), 4.0) == 1);
    }
}

TEST_CASE("breadth-first search yields an optimal winning replay") {
    for (int level : {1, 2, 3}) {
        for (std::uint64_t seed = 100; seed < 120; ++seed) {
            const MazeInstance m = generate_maze(level, seed);
            const auto path = shortest_path(m);
            REQUIRE(path.has_value());
            REQUIRE(path->size() <= kMaxEpisodeSteps);
            // A shortest path can never beat the Manhattan distance.
            const std::size_t manhattan = static_cast<std::size_t>(
                std::abs(m.goal.row - m.start.row) + std::abs(m.goal.col - m.start.col));
            REQUIRE(path->size() >= manhattan);

            EpisodeState s = initial_state(m);
            double total = 0.0;
            for (Action a : *path) {
                REQUIRE_FALSE(s.terminal);
                const StepResult r = step(m, s, a);
                total += r.reward;
                s = r.state;
            }
            CHECK(s.terminal);
            CHECK(s.cause == TerminalCause::Goal);
            CHECK(total == 100.0);
        }
    }
}

TEST_CASE("episode returns are restricted to -100, 0, +100") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i) {
        const MazeInstance m = generate_maze(1 + i % 3, 200 + i);
        EpisodeState s = initial_state(m);
        double total = 0.0;
        while (!s.terminal) {
            const StepResult r = step(m, s, static_cast<Action>(rng() % kNumActions));
            total += r.reward;
            s = r.state;
        }
        CHECK((total == 100.0 || total == -100.0 || total == 0.0));
    }
}

TEST_CASE("render shows the grid with the agent overlay") {
    MazeInstance m = open_maze({0, 0}, {0, 8});
    add_pit(m, 8, 8);
    const std::string plain = render(m);
    CHECK(plain.find('S') != std::string::npos);
    CHECK(plain.find('G') != std::string::npos);
    CHECK(plain.find('P') != std::string::npos);
    CHECK(plain.find('A') == std::string::npos);

    EpisodeState s = initial_state(m);
    s.agent = {0, 4};
    const std::string with_agent = render(m, &s);
    CHECK(with_agent.find('A') != std::string::npos);
}
