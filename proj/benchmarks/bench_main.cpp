#include <benchmark/benchmark.h>

#include <random>

#include "stochalign/heuristics.hpp"
#include "stochalign/milp.hpp"
#include "stochalign/random_net.hpp"
#include "stochalign/search.hpp"

namespace {

using namespace stochalign;

StochasticNet running_net() {
  NetBuilder b;
  const auto p1 = b.add_place("p1", 1);
  const auto p2 = b.add_place("p2");
  const auto p3 = b.add_place("p3");
  const auto p4 = b.add_place("p4");
  b.add_transition("t1", "a", Rational(1), {p1}, {p2});
  b.add_transition("t2", "b", Rational(99), {p1}, {p2, p3});
  b.add_transition("t3", "c", Rational(3), {p2}, {p4});
  b.add_transition("t4", "d", Rational(2), {p3}, {p4});
  return b.build();
}

struct Generated {
  StochasticNet net;
  Trace trace;
};

Generated generated(std::uint64_t seed, std::size_t length) {
  std::mt19937_64 rng(1000 + seed);
  gen::NetShape shape;
  shape.places = 30;
  shape.transitions = 40;
  shape.alphabet = 20;
  auto net = gen::random_block_net(rng, shape);
  auto trace = gen::random_trace_of_length(net, rng, length, 0.2);
  return {std::move(net), std::move(trace)};
}

void BM_RunningExample(benchmark::State& state) {
  const SyncProduct sp({"a", "d", "c"}, running_net());
  SearchConfig config;
  config.alpha = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(stochastic_alignment(sp, config));
}
BENCHMARK(BM_RunningExample)->Arg(0)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

// Runtime against trace length on one generated net.
void BM_TraceLength(benchmark::State& state) {
  const auto g = generated(0, static_cast<std::size_t>(state.range(0)));
  const SyncProduct sp(g.trace, g.net);
  SearchConfig config;
  config.alpha = 0.5;
  std::size_t expanded = 0;
  for (auto _ : state) expanded = stochastic_alignment(sp, config).stats.expanded;
  state.counters["expanded"] = static_cast<double>(expanded);
}
BENCHMARK(BM_TraceLength)->DenseRange(10, 50, 10)->Unit(benchmark::kMillisecond);

void BM_EditDistanceHeuristic(benchmark::State& state) {
  const auto g = generated(1, 50);
  const SyncProduct sp(g.trace, g.net);
  HeuristicConfig config;
  config.lp_relaxation = state.range(0) != 0;
  const HeuristicModel model(sp, config);
  for (auto _ : state) benchmark::DoNotOptimize(model.edit_distance(sp.net().initial_marking()));
}
BENCHMARK(BM_EditDistanceHeuristic)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Warm-started re-solves along a random walk against fresh solves.
void BM_HeuristicReuse(benchmark::State& state) {
  const auto g = generated(2, 30);
  const SyncProduct sp(g.trace, g.net);
  const HeuristicModel model(sp);
  std::mt19937_64 rng(5);
  std::vector<Marking> walk{sp.net().initial_marking()};
  for (int i = 0; i < 20; ++i) {
    const auto enabled = enabled_transitions(sp.net(), walk.back());
    if (enabled.empty()) break;
    walk.push_back(fire(sp.net(), walk.back(), enabled[rng() % enabled.size()]));
  }
  const bool warm = state.range(0) != 0;
  for (auto _ : state) {
    HeuristicEvaluator evaluator(model);
    for (const auto& m : walk) benchmark::DoNotOptimize(warm ? evaluator.edit_distance(m) : model.edit_distance(m));
  }
}
BENCHMARK(BM_HeuristicReuse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
