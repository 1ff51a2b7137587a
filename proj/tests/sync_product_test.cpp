#include <gtest/gtest.h>

#include <map>

#include "stochalign/errors.hpp"
#include "stochalign/oracle.hpp"
#include "stochalign/sync_product.hpp"
#include "support.hpp"

namespace stochalign {
namespace {

using test::adc;
using test::n2;

// Product transition ids for <a,d,c> x N2: model moves 0-3, trace moves 4-6, then the
// synchronous moves (a,t1), (d,t4), (c,t3).
constexpr TransitionId kModel1 = 0, kModel2 = 1, kModel3 = 2, kModel4 = 3;
constexpr TransitionId kTraceA = 4, kTraceD = 5, kTraceC = 6;
constexpr TransitionId kSyncA = 7, kSyncD = 8, kSyncC = 9;

TEST(SyncProduct, RunningExampleStructure) {
  const SyncProduct sp(adc(), n2());
  EXPECT_EQ(sp.net().num_places(), 8u);
  ASSERT_EQ(sp.net().num_transitions(), 10u);
  for (TransitionId t = 0; t < 4; ++t) EXPECT_EQ(sp.kind(t), MoveKind::Model);
  for (TransitionId t = 4; t < 7; ++t) EXPECT_EQ(sp.kind(t), MoveKind::Trace);
  EXPECT_EQ(sp.kind(kSyncA), MoveKind::Sync);
  EXPECT_EQ(sp.to_model(kSyncA), 0);
  EXPECT_EQ(sp.trace_position(kSyncA), 0u);
  EXPECT_EQ(sp.to_model(kSyncD), 3);
  EXPECT_EQ(sp.trace_position(kSyncD), 1u);
  EXPECT_EQ(sp.to_model(kSyncC), 2);
  EXPECT_EQ(sp.trace_position(kSyncC), 2u);
  EXPECT_EQ(sp.net().initial_marking(), Marking({1, 0, 0, 0, 1, 0, 0, 0}));
  EXPECT_FALSE(sp.to_model(kTraceA).has_value());
}

TEST(SyncProduct, EmptyTraceHasOnlyModelMoves) {
  const SyncProduct sp({}, n2());
  ASSERT_EQ(sp.net().num_transitions(), 4u);
  for (TransitionId t = 0; t < 4; ++t) EXPECT_EQ(sp.kind(t), MoveKind::Model);
}

TEST(SyncProduct, UnmatchedActivity) {
  const SyncProduct sp({"x"}, n2());
  std::size_t trace = 0, model = 0, sync = 0;
  for (TransitionId t = 0; t < static_cast<TransitionId>(sp.net().num_transitions()); ++t) {
    trace += sp.kind(t) == MoveKind::Trace;
    model += sp.kind(t) == MoveKind::Model;
    sync += sp.kind(t) == MoveKind::Sync;
  }
  EXPECT_EQ(trace, 1u);
  EXPECT_EQ(model, 4u);
  EXPECT_EQ(sync, 0u);
}

TEST(SyncProduct, DuplicateLabelsYieldOneSyncPerPair) {
  NetBuilder b;
  const auto p = b.add_place("p", 1);
  const auto q = b.add_place("q");
  b.add_transition("t1", "a", Rational(1), {p}, {q});
  b.add_transition("t2", "a", Rational(1), {p}, {q});
  const SyncProduct sp({"a", "a"}, b.build());
  std::size_t sync = 0;
  for (TransitionId t = 0; t < static_cast<TransitionId>(sp.net().num_transitions()); ++t)
    sync += sp.kind(t) == MoveKind::Sync;
  EXPECT_EQ(sync, 4u);
}

TEST(ProbabilityGain, InitialMarking) {
  const SyncProduct sp(adc(), n2());
  const auto& m = sp.net().initial_marking();
  EXPECT_EQ(probability_gain_exact(sp, m, kTraceA), Rational(1));
  EXPECT_EQ(probability_gain_exact(sp, m, kModel2), Rational(99, 100));
  EXPECT_EQ(probability_gain_exact(sp, m, kSyncA), Rational(1, 100));
  EXPECT_DOUBLE_EQ(probability_gain(sp, m, kSyncA), 0.01);
  EXPECT_THROW(probability_gain(sp, m, kModel3), NotEnabledError);
}

TEST(ReverseMarking, Restriction) {
  const SyncProduct sp(adc(), n2());
  EXPECT_EQ(to_model_marking(sp, sp.net().initial_marking()), Marking({1, 0, 0, 0}));
  EXPECT_EQ(to_model_marking(sp, Marking({0, 0, 0, 0, 0, 0, 0, 1})), Marking({0, 0, 0, 0}));
  EXPECT_EQ(to_model_marking(sp, Marking({0, 0, 0, 2, 0, 0, 0, 1})), Marking({0, 0, 0, 2}));
}

TEST(Classify, CostsAndKinds) {
  const SyncProduct sp(adc(), n2());
  EXPECT_EQ(classify(sp, kSyncD), MoveKind::Sync);
  EXPECT_EQ(move_cost(sp, kSyncD), 0);
  EXPECT_EQ(classify(sp, kModel2), MoveKind::Model);
  EXPECT_EQ(move_cost(sp, kModel2), 1);
  EXPECT_EQ(move_cost(sp, kTraceC), 1);

  NetBuilder b;
  const auto p = b.add_place("p", 1);
  b.add_transition("tau", std::nullopt, Rational(1), {p}, {});
  const SyncProduct silent({}, b.build());
  EXPECT_EQ(classify(silent, 0), MoveKind::SilentModel);
  EXPECT_EQ(move_cost(silent, 0), 0);
}

TEST(Alignment, KnownAlignmentCosts) {
  const SyncProduct sp(adc(), n2());
  const std::vector<TransitionId> g1{kModel2, kModel3, kTraceA, kSyncD, kTraceC};
  const std::vector<TransitionId> balanced{kModel2, kTraceA, kSyncD, kSyncC};
  const std::vector<TransitionId> g3{kSyncA, kTraceD, kSyncC};
  EXPECT_EQ(make_alignment(sp, g1, 1.0).cost, 4);
  EXPECT_EQ(make_alignment(sp, balanced, 1.0).cost, 2);
  EXPECT_EQ(make_alignment(sp, g3, 1.0).cost, 1);

  const auto a2 = make_alignment(sp, balanced, 0.5, true);
  EXPECT_EQ(*a2.exact_probability, Rational(198, 500));
  EXPECT_EQ(trace_projection(sp, a2), adc());
  EXPECT_EQ(model_projection(a2), (std::vector<TransitionId>{1, 3, 2}));
}

TEST(Alignment, RejectsIncompleteSequences) {
  const SyncProduct sp(adc(), n2());
  const std::vector<TransitionId> partial{kSyncA, kTraceD};
  EXPECT_THROW(make_alignment(sp, partial, 1.0), InvalidPathError);
}

TEST(Alignment, EnabledProductMovesHaveEnabledModelComponent) {
  const SyncProduct sp(adc(), n2());
  std::vector<Marking> frontier{sp.net().initial_marking()};
  std::size_t checked = 0;
  while (!frontier.empty()) {
    const auto m = frontier.back();
    frontier.pop_back();
    for (auto t : enabled_transitions(sp.net(), m)) {
      if (auto mt = sp.to_model(t)) {
        EXPECT_TRUE(is_enabled(sp.model(), to_model_marking(sp, m), *mt));
        ++checked;
      }
      frontier.push_back(fire(sp.net(), m, t));
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Alignment, MinimalCostOverEmbeddingsEqualsLcsDistance) {
  const auto net = n2();
  const auto trace = adc();
  const SyncProduct sp(trace, net);
  std::map<std::vector<TransitionId>, int> best;
  test::for_each_alignment(sp, 16, [&](const std::vector<TransitionId>& moves) {
    const auto a = make_alignment(sp, moves, 1.0);
    EXPECT_EQ(trace_projection(sp, a), trace);
    const auto model = model_projection(a);
    auto [it, fresh] = best.emplace(model, a.cost);
    if (!fresh) it->second = std::min(it->second, a.cost);
  });
  ASSERT_EQ(best.size(), 3u);
  for (const auto& [path, cost] : best)
    EXPECT_EQ(static_cast<std::size_t>(cost), oracle::lcs_edit_distance(trace, label_projection(net, path)));
}

}  // namespace
}  // namespace stochalign
