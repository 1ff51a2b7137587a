#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>

#include "stochalign/search.hpp"
#include "support.hpp"

namespace stochalign {
namespace {

using test::adc;
using test::n2;

using MoveKey = std::tuple<MoveKind, std::optional<std::size_t>, std::optional<TransitionId>>;

std::vector<MoveKey> move_set(const Alignment& a) {
  std::vector<MoveKey> out;
  for (const auto& m : a.moves) out.emplace_back(m.kind, m.trace_position, m.model_transition);
  std::sort(out.begin(), out.end());
  return out;
}

SearchResult align(double alpha, bool rational = true) {
  SearchConfig config;
  config.alpha = alpha;
  config.rational = rational;
  config.check_invariants = true;
  return stochastic_alignment(n2(), adc(), config);
}

TEST(Search, BalanceFactorOne) {
  const auto r = align(1.0);
  EXPECT_EQ(model_projection(r.alignment), (std::vector<TransitionId>{0, 2}));
  EXPECT_EQ(r.alignment.cost, 1);
  EXPECT_NEAR(r.alignment.loss, 0.301, 5e-4);
  EXPECT_EQ(*r.alignment.exact_probability, Rational(5, 500));
}

TEST(Search, BalanceFactorHalf) {
  const auto r = align(0.5);
  EXPECT_EQ(model_projection(r.alignment), (std::vector<TransitionId>{1, 3, 2}));
  EXPECT_NEAR(r.alignment.loss, 0.818, 5e-4);
  EXPECT_EQ(r.alignment.cost, 2);
}

TEST(Search, BalanceFactorZero) {
  const auto r = align(0.0);
  EXPECT_EQ(model_projection(r.alignment), (std::vector<TransitionId>{1, 2, 3}));
  EXPECT_NEAR(r.alignment.loss, 1.226, 5e-4);
}

TEST(Search, MoveStructuresPerAlpha) {
  using K = MoveKind;
  const std::vector<MoveKey> balanced{{K::Model, std::nullopt, 1}, {K::Trace, 0, std::nullopt}, {K::Sync, 1, 3}, {K::Sync, 2, 2}};
  const std::vector<MoveKey> closest{{K::Sync, 0, 0}, {K::Trace, 1, std::nullopt}, {K::Sync, 2, 2}};
  auto sorted = [](std::vector<MoveKey> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(move_set(align(0.5).alignment), sorted(balanced));
  EXPECT_EQ(move_set(align(1.0).alignment), sorted(closest));
  EXPECT_EQ(move_set(align(0.75).alignment), sorted(closest));
}

TEST(Search, PerfectFit) {
  NetBuilder b;
  const auto p = b.add_place("p", 1);
  const auto q = b.add_place("q");
  const auto r = b.add_place("r");
  b.add_transition("t1", "x", Rational(2), {p}, {q});
  b.add_transition("t2", "y", Rational(5), {q}, {r});
  const auto net = b.build();
  for (double alpha : {0.0, 0.5, 1.0}) {
    SearchConfig config;
    config.alpha = alpha;
    const auto res = stochastic_alignment(net, {"x", "y"}, config);
    EXPECT_DOUBLE_EQ(res.alignment.probability, 1.0);
    // At alpha 0 the distance is ignored, so log and model moves tie with the synchronous run.
    if (alpha > 0.0) {
      EXPECT_EQ(res.alignment.cost, 0);
      EXPECT_EQ(res.alignment.moves.size(), 2u);
      for (const auto& m : res.alignment.moves) EXPECT_EQ(m.kind, MoveKind::Sync);
    }
    EXPECT_DOUBLE_EQ(res.alignment.loss, loss(0, 0.0, LossParams(alpha)));
  }
}

TEST(Search, EmptyTraceAgainstChoice) {
  SearchConfig config;
  config.alpha = 0.0;
  const auto r = stochastic_alignment(n2(), {}, config);
  EXPECT_EQ(model_projection(r.alignment), (std::vector<TransitionId>{1, 2, 3}));
  EXPECT_EQ(r.alignment.cost, 3);
}

TEST(Expand, InitialNodeChildren) {
  const SyncProduct sp(adc(), n2());
  AlignmentSearch search(sp, {});
  const auto root = search.initial_node();
  const auto children = search.expand(root);
  std::vector<TransitionId> moves;
  for (auto c : children) moves.push_back(search.node(c).move);
  std::sort(moves.begin(), moves.end());
  // (>>,t1), (>>,t2), (a,>>), (a,t1)
  EXPECT_EQ(moves, (std::vector<TransitionId>{0, 1, 4, 7}));
  for (auto c : children) EXPECT_EQ(search.node(c).g_distance, sp.cost(search.node(c).move));
}

TEST(Expand, RepeatedArrivalIsSuppressed) {
  const SyncProduct sp(adc(), n2());
  AlignmentSearch search(sp, {});
  const auto root = search.initial_node();
  EXPECT_EQ(search.expand(root).size(), 4u);
  EXPECT_TRUE(search.expand(root).empty());
  EXPECT_EQ(search.stats().pruned, 4u);
}

TEST(Expand, DeadlockNodeIsRejected) {
  NetBuilder b;
  b.add_place("p", 1);
  const SyncProduct sp({}, b.build());
  AlignmentSearch search(sp, {});
  EXPECT_THROW(search.expand(search.initial_node()), std::logic_error);
}

TEST(Search, Determinism) {
  std::mt19937_64 rng(3);
  gen::NetShape shape;
  shape.places = 12;
  shape.transitions = 14;
  const auto net = gen::random_block_net(rng, shape);
  const auto trace = gen::random_trace_of_length(net, rng, 10, 0.3);
  for (double alpha : {0.2, 0.7}) {
    SearchConfig config;
    config.alpha = alpha;
    const auto a = stochastic_alignment(net, trace, config);
    const auto b = stochastic_alignment(net, trace, config);
    std::vector<TransitionId> ma, mb;
    for (const auto& m : a.alignment.moves) ma.push_back(m.product_transition);
    for (const auto& m : b.alignment.moves) mb.push_back(m.product_transition);
    EXPECT_EQ(ma, mb);
    EXPECT_EQ(a.stats.expanded, b.stats.expanded);
  }
}

TEST(Search, BudgetExceededCarriesIncumbent) {
  SearchConfig config;
  config.alpha = 0.5;
  config.node_budget = 1;
  try {
    stochastic_alignment(n2(), adc(), config);
    FAIL() << "expected the budget to run out";
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.stats().expanded, 1u);
  }
}

TEST(Search, NoDeadlockReachable) {
  NetBuilder b;
  const auto p = b.add_place("p", 1);
  b.add_transition("spin", "a", Rational(1), {p}, {p});
  SearchConfig config;
  config.node_budget = 50;
  EXPECT_THROW(stochastic_alignment(b.build(), {"a"}, config), NoDeadlockError);
}

TEST(Search, LoopNets) {
  // p0 -a-> p1 -tau-> p0 (loop back), p1 -b-> p2
  NetBuilder b;
  const auto p0 = b.add_place("p0", 1);
  const auto p1 = b.add_place("p1");
  const auto p2 = b.add_place("p2");
  b.add_transition("t1", "a", Rational(1), {p0}, {p1});
  b.add_transition("t2", std::nullopt, Rational(1), {p1}, {p0});
  b.add_transition("t3", "b", Rational(3), {p1}, {p2});
  const auto net = b.build();
  SearchConfig config;
  config.alpha = 1.0;
  config.check_invariants = true;
  const auto r = stochastic_alignment(net, {"a", "a", "a", "b"}, config);
  EXPECT_EQ(r.alignment.cost, 0);
  EXPECT_EQ(model_projection(r.alignment), (std::vector<TransitionId>{0, 1, 0, 1, 0, 2}));
}

TEST(Search, LpRelaxationModeFindsSameLoss) {
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    SearchConfig config;
    config.alpha = alpha;
    config.heuristic.lp_relaxation = true;
    const auto relaxed = stochastic_alignment(n2(), adc(), config);
    EXPECT_NEAR(relaxed.alignment.loss, align(alpha).alignment.loss, 1e-12);
  }
}

TEST(Search, EagerHeuristicsFindSameLoss) {
  for (double alpha : {0.0, 0.5, 1.0}) {
    SearchConfig config;
    config.alpha = alpha;
    config.lazy_heuristics = false;
    EXPECT_NEAR(stochastic_alignment(n2(), adc(), config).alignment.loss, align(alpha).alignment.loss, 1e-12);
  }
}

}  // namespace
}  // namespace stochalign
