#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stochalign/net.hpp"

namespace stochalign {

enum class MoveKind {
  Sync,         ///< (trace transition, model transition) with equal labels
  Model,        ///< (>>, model transition) with a visible label
  SilentModel,  ///< (>>, tau transition)
  Trace,        ///< (trace transition, >>)
};

std::string_view to_string(MoveKind kind) noexcept;

/// Synchronous product of a trace net and a stochastic net.
///
/// Product places are the model places followed by the |trace|+1 trace-net places. Product
/// transitions are ordered: model moves (same index as in the model), trace moves (one per
/// trace position), then synchronous moves sorted by trace position and model transition.
/// Product transitions carry unit weights; probabilities are always taken from the model.
class SyncProduct {
 public:
  SyncProduct(Trace trace, StochasticNet model);

  const StochasticNet& net() const noexcept { return product_; }
  const StochasticNet& model() const noexcept { return model_; }
  const Trace& trace() const noexcept { return trace_; }
  std::size_t trace_length() const noexcept { return trace_.size(); }
  std::size_t model_place_count() const noexcept { return model_.num_places(); }

  MoveKind kind(TransitionId t) const { return kinds_.at(static_cast<std::size_t>(t)); }
  int cost(TransitionId t) const { return costs_.at(static_cast<std::size_t>(t)); }
  std::span<const int> costs() const noexcept { return costs_; }
  /// r_t: model transition behind a model or synchronous move.
  std::optional<TransitionId> to_model(TransitionId t) const { return to_model_.at(static_cast<std::size_t>(t)); }
  /// 0-based trace position behind a trace or synchronous move.
  std::optional<std::size_t> trace_position(TransitionId t) const {
    return trace_pos_.at(static_cast<std::size_t>(t));
  }
  bool is_model_place(PlaceId p) const noexcept { return static_cast<std::size_t>(p) < model_.num_places(); }

 private:
  Trace trace_;
  StochasticNet model_;
  StochasticNet product_;
  std::vector<MoveKind> kinds_;
  std::vector<int> costs_;
  std::vector<std::optional<TransitionId>> to_model_;
  std::vector<std::optional<std::size_t>> trace_pos_;
};

SyncProduct build_sync_product(const Trace& trace, const StochasticNet& model);

MoveKind classify(const SyncProduct& sp, TransitionId t);
/// 0 for synchronous and silent model moves, 1 otherwise.
int move_cost(const SyncProduct& sp, TransitionId t);

/// r_m: restriction of a product marking to the model places.
Marking to_model_marking(const SyncProduct& sp, const Marking& m);

/// 1 for trace moves; otherwise the model firing probability of r_t(t) at r_m(m).
/// Throws NotEnabledError if t is not enabled at m.
double probability_gain(const SyncProduct& sp, const Marking& m, TransitionId t);
Rational probability_gain_exact(const SyncProduct& sp, const Marking& m, TransitionId t);

struct Move {
  MoveKind kind;
  TransitionId product_transition;
  std::optional<std::size_t> trace_position;
  std::optional<TransitionId> model_transition;
  double gain;
};

struct Alignment {
  std::vector<Move> moves;
  int cost = 0;
  double probability = 1.0;
  double log10_probability = 0.0;
  double loss = 0.0;
  double alpha = 0.0;
  std::optional<Rational> exact_probability;  ///< set in rational mode
};

/// Builds an alignment (moves, totals, loss) by replaying product transitions from the initial
/// product marking. Throws InvalidPathError unless the sequence ends in a product deadlock.
Alignment make_alignment(const SyncProduct& sp, std::span<const TransitionId> product_transitions, double alpha,
                         bool exact = false);

/// Trace-side projection (drops >>); equals the trace for every valid alignment.
Trace trace_projection(const SyncProduct& sp, const Alignment& alignment);
/// Model-side projection: the model transitions in firing order.
std::vector<TransitionId> model_projection(const Alignment& alignment);

}  // namespace stochalign
