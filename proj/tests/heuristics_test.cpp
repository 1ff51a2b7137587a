#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stochalign/heuristics.hpp"
#include "stochalign/oracle.hpp"
#include "support.hpp"

namespace stochalign {
namespace {

using test::adc;
using test::n2;

Marking final_marking(const SyncProduct& sp, const Marking& m, const std::vector<std::int64_t>& x) {
  const auto mx = matrices(sp.net());
  Marking out = m;
  for (std::size_t p = 0; p < mx.places; ++p) {
    std::int64_t v = m[static_cast<PlaceId>(p)];
    for (std::size_t t = 0; t < mx.transitions; ++t) v += mx.incidence_at(static_cast<PlaceId>(p), static_cast<TransitionId>(t)) * x[t];
    out[static_cast<PlaceId>(p)] = static_cast<std::int32_t>(v);
  }
  return out;
}

TEST(EditDistanceHeuristic, RunningExampleInitialMarking) {
  const SyncProduct sp(adc(), n2());
  const auto r = edit_distance_heuristic(sp, sp.net().initial_marking());
  EXPECT_LE(r.value, 1.0);
  EXPECT_GE(r.value, 0.0);
  EXPECT_EQ(r.status, milp::MilpStatus::Optimal);
}

TEST(EditDistanceHeuristic, DeadlockIsZero) {
  const SyncProduct sp(adc(), n2());
  const Marking done({0, 0, 0, 1, 0, 0, 0, 1});
  const auto d = edit_distance_heuristic(sp, done);
  const auto p = probability_gain_heuristic(sp, done);
  EXPECT_EQ(d.value, 0.0);
  EXPECT_EQ(p.value, 0.0);
  EXPECT_TRUE(d.exact_hint);
}

TEST(EditDistanceHeuristic, TraceOnlyProduct) {
  NetBuilder b;
  b.add_place("idle", 1);
  const SyncProduct sp({"a"}, b.build());
  const auto r = edit_distance_heuristic(sp, sp.net().initial_marking());
  const auto front = oracle::product_pareto_front(sp, sp.net().initial_marking());
  ASSERT_FALSE(front.entries.empty());
  EXPECT_EQ(front.entries.front().cost, 1);
  EXPECT_DOUBLE_EQ(r.value, 1.0);
}

TEST(ProbabilityHeuristic, RunningExampleInitialMarking) {
  const SyncProduct sp(adc(), n2());
  const auto r = probability_gain_heuristic(sp, sp.net().initial_marking());
  EXPECT_GE(r.value, std::log10(297.0 / 500.0) - 1e-12);
  EXPECT_LE(r.value, 0.0);
}

TEST(ProbabilityHeuristic, BoundsEveryCompletion) {
  const SyncProduct sp(adc(), n2());
  const HeuristicModel model(sp);
  std::vector<Marking> stack{sp.net().initial_marking()};
  std::set<Marking> seen;
  while (!stack.empty()) {
    const auto m = stack.back();
    stack.pop_back();
    if (!seen.insert(m).second) continue;
    const auto front = oracle::product_pareto_front(sp, m);
    const auto h = model.probability_gain(m);
    for (const auto& e : front.entries) EXPECT_GE(h.value, e.log10_gain - 1e-9);
    for (auto t : enabled_transitions(sp.net(), m)) stack.push_back(fire(sp.net(), m, t));
  }
  EXPECT_GT(seen.size(), 5u);
}

TEST(GainBounds, Examples) {
  const SyncProduct sp(adc(), n2());
  const auto bounds = build_gain_bounds_exact(sp);
  EXPECT_EQ(bounds[1], Rational(99, 100));
  EXPECT_EQ(bounds[0], Rational(1, 100));
  EXPECT_EQ(bounds[4], Rational(1));
  // t3 and t4 have disjoint presets, so neither has a peer.
  EXPECT_EQ(bounds[2], Rational(1));
  EXPECT_EQ(bounds[3], Rational(1));
  EXPECT_EQ(build_gain_bounds(sp)[1], 0.99);
}

TEST(GainBounds, DominateReachableGains) {
  const SyncProduct sp(adc(), n2());
  const auto bounds = build_gain_bounds_exact(sp);
  std::vector<Marking> stack{sp.net().initial_marking()};
  while (!stack.empty()) {
    const auto m = stack.back();
    stack.pop_back();
    for (auto t : enabled_transitions(sp.net(), m)) {
      EXPECT_LE(probability_gain_exact(sp, m, t), bounds[static_cast<std::size_t>(t)]);
      stack.push_back(fire(sp.net(), m, t));
    }
  }
}

TEST(DeadlockEncoding, RunningExample) {
  const SyncProduct sp(adc(), n2());
  const HeuristicModel model(sp);
  const auto enc = model.deadlock_encoding(sp.net().initial_marking());
  EXPECT_FALSE(enc.unsatisfiable);
  // Every product transition of this net has one input place, or contains a single-input preset.
  EXPECT_TRUE(enc.indicators.empty());
  std::set<PlaceId> bounded;
  for (const auto& [p, limit] : enc.place_bounds) {
    bounded.insert(p);
    EXPECT_EQ(limit, 0);
  }
  EXPECT_EQ(bounded, (std::set<PlaceId>{0, 1, 2, 4, 5, 6}));
}

TEST(DeadlockEncoding, IndicatorsForJoins) {
  NetBuilder b;
  const auto p = b.add_place("p", 1);
  const auto q = b.add_place("q", 1);
  const auto r = b.add_place("r");
  b.add_transition("join", "a", Rational(1), {p, q}, {r});
  const SyncProduct sp({}, b.build());
  const HeuristicModel model(sp);
  const auto enc = model.deadlock_encoding(sp.net().initial_marking());
  ASSERT_EQ(enc.indicators.size(), 2u);
  EXPECT_EQ(enc.indicators[0].required, 1);
  const auto h = model.edit_distance(sp.net().initial_marking());
  EXPECT_DOUBLE_EQ(h.value, 1.0);
}

TEST(DeadlockEncoding, EmptyPresetIsUnsatisfiable) {
  NetBuilder b;
  b.add_place("p", 1);
  b.add_transition("source", "a", Rational(1), {}, {0});
  const SyncProduct sp({}, b.build());
  const HeuristicModel model(sp);
  EXPECT_TRUE(model.deadlock_encoding(sp.net().initial_marking()).unsatisfiable);
  const auto h = model.edit_distance(sp.net().initial_marking());
  EXPECT_EQ(h.status, milp::MilpStatus::Infeasible);
  EXPECT_EQ(h.value, 0.0);
}

TEST(DeadlockEncoding, OptimalSolutionsReachDeadlocks) {
  std::mt19937_64 rng(7);
  std::size_t checked = 0;
  for (int i = 0; i < 40; ++i) {
    const auto net = gen::random_small_net(rng, test::small_shape());
    const auto trace = gen::add_noise(gen::simulate_trace(net, rng, 12), rng, 0.2, gen::net_alphabet(net));
    const SyncProduct sp(trace, net);
    const HeuristicModel model(sp);
    auto m = sp.net().initial_marking();
    for (int step = 0; step < 6; ++step) {
      for (auto r : {model.edit_distance(m), model.probability_gain(m)}) {
        if (r.status != milp::MilpStatus::Optimal || !r.exact_hint) continue;
        const auto md = final_marking(sp, m, r.parikh);
        for (std::size_t p = 0; p < md.size(); ++p) EXPECT_GE(md[static_cast<PlaceId>(p)], 0);
        EXPECT_TRUE(is_deadlock(sp.net(), md));
        ++checked;
      }
      const auto enabled = enabled_transitions(sp.net(), m);
      if (enabled.empty()) break;
      m = fire(sp.net(), m, enabled[rng() % enabled.size()]);
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(HeuristicEvaluator, AgreesWithFreshSolves) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    gen::NetShape shape;
    shape.places = 4 + static_cast<std::size_t>(i % 12);
    shape.transitions = 4 + static_cast<std::size_t>(i % 14);
    const auto net = gen::random_block_net(rng, shape);
    const auto trace = gen::random_trace_of_length(net, rng, 3 + static_cast<std::size_t>(i % 8), 0.3);
    const SyncProduct sp(trace, net);
    HeuristicConfig config;
    config.max_nodes = 20000;
    const HeuristicModel model(sp, config);
    HeuristicEvaluator evaluator(model);
    auto m = sp.net().initial_marking();
    for (int step = 0; step < 20; ++step) {
      const auto a = evaluator.edit_distance(m), b = model.edit_distance(m);
      const auto c = evaluator.probability_gain(m), d = model.probability_gain(m);
      EXPECT_EQ(a.status, b.status);
      EXPECT_NEAR(a.value, b.value, 1e-7);
      EXPECT_EQ(c.status, d.status);
      EXPECT_NEAR(c.value, d.value, 1e-7);
      const auto enabled = enabled_transitions(sp.net(), m);
      if (enabled.empty()) break;
      m = fire(sp.net(), m, enabled[rng() % enabled.size()]);
    }
  }
}

TEST(HeuristicModel, LpRelaxationIsWeaker) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto net = gen::random_small_net(rng, test::small_shape());
    const auto trace = gen::add_noise(gen::simulate_trace(net, rng, 10), rng, 0.3, gen::net_alphabet(net));
    const SyncProduct sp(trace, net);
    HeuristicConfig lp;
    lp.lp_relaxation = true;
    const HeuristicModel exact(sp), relaxed(sp, lp);
    const auto& m = sp.net().initial_marking();
    const auto a = exact.edit_distance(m), b = relaxed.edit_distance(m);
    if (a.status == milp::MilpStatus::Optimal) {
      EXPECT_LE(b.value, a.value + 1e-9);
    }
    const auto c = exact.probability_gain(m), d = relaxed.probability_gain(m);
    if (c.status == milp::MilpStatus::Optimal) {
      EXPECT_GE(d.value, c.value - 1e-9);
    }
  }
}

TEST(HeuristicModel, DefaultCap) {
  const SyncProduct sp(adc(), n2());
  // |trace| + |model places| + initial tokens + 2 |model transitions|
  EXPECT_EQ(HeuristicModel(sp).cap(), 3 + 4 + 1 + 8);
  HeuristicConfig config;
  config.cap = 5;
  EXPECT_EQ(HeuristicModel(sp, config).cap(), 5);
}

}  // namespace
}  // namespace stochalign
