#include <benchmark/benchmark.h>

#include <random>

#include "urbf/graph.hpp"
#include "urbf/layers.hpp"
#include "urbf/maze.hpp"
#include "urbf/optim.hpp"

namespace {

urbf::Tensor random_batch(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    std::vector<double> values(rows * cols);
    for (double& v : values) v = dist(rng);
    return urbf::Tensor::from({rows, cols}, std::move(values));
}

void BM_UrbfForward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    const urbf::UrbfLayer layer = urbf::UrbfLayer::create(2, 20, -5.0, 5.0);
    const urbf::Tensor x = random_batch(batch, 2, 1);
    for (auto _ : state) {
        urbf::Graph g;
        auto out = layer.forward(g, g.leaf(x));
        benchmark::DoNotOptimize(g.value(out).values().data());
    }
}
BENCHMARK(BM_UrbfForward)->Arg(64)->Arg(256);

void BM_RegressionTrainStep(benchmark::State& state) {
    urbf::BuildOptions opts;
    opts.seed = 3;
    urbf::Network net =
        urbf::Network::build(urbf::NetworkSpec::parse("urbf:20,32,64,128"), 2, 1, opts);
    urbf::Adam adam(net.parameters(), {});
    const urbf::Tensor x = random_batch(256, 2, 2);
    const urbf::Tensor y = random_batch(256, 1, 4);
    for (auto _ : state) {
        urbf::Graph g;
        auto loss = g.mean(g.square(g.subtract(net.forward(g, g.leaf(x)), g.leaf(y))));
        adam.zero_grad();
        g.backward(loss);
        adam.step();
        net.project_constraints();
    }
}
BENCHMARK(BM_RegressionTrainStep);

void BM_MazeEpisode(benchmark::State& state) {
    const urbf::MazeInstance maze = urbf::generate_maze(2, 17);
    const auto path = urbf::shortest_path(maze);
    for (auto _ : state) {
        urbf::EpisodeState s = urbf::initial_state(maze);
        double total = 0.0;
        for (urbf::Action a : *path) {
            const auto r = urbf::step(maze, s, a);
            total += r.reward;
            s = r.state;
        }
        benchmark::DoNotOptimize(total);
    }
}
BENCHMARK(BM_MazeEpisode);

}  // namespace

BENCHMARK_MAIN();
