#include "stochalign/sync_product.hpp"

#include <cmath>

#include "stochalign/errors.hpp"
#include "stochalign/loss.hpp"

namespace stochalign {

std::string_view to_string(MoveKind kind) noexcept {
  switch (kind) {
    case MoveKind::Sync:
      return "sync";
    case MoveKind::Model:
      return "model";
    case MoveKind::SilentModel:
      return "silent";
    case MoveKind::Trace:
      return "log";
  }
  return "?";
}

namespace {

std::vector<PlaceId> expand_arcs(const std::vector<Arc>& arcs, PlaceId offset) {
  std::vector<PlaceId> out;
  for (const auto& a : arcs)
    for (std::int32_t i = 0; i < a.multiplicity; ++i) out.push_back(a.place + offset);
  return out;
}

std::vector<PlaceId> concat(std::vector<PlaceId> a, const std::vector<PlaceId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

SyncProduct::SyncProduct(Trace trace, StochasticNet model) : trace_(std::move(trace)), model_(std::move(model)) {
  const StochasticNet trace_net = build_trace_net(trace_);
  const auto offset = static_cast<PlaceId>(model_.num_places());

  NetBuilder b;
  for (std::size_t p = 0; p < model_.num_places(); ++p)
    b.add_place(model_.place_name(static_cast<PlaceId>(p)), model_.initial_marking()[static_cast<PlaceId>(p)]);
  for (std::size_t p = 0; p < trace_net.num_places(); ++p)
    b.add_place(trace_net.place_name(static_cast<PlaceId>(p)),
                trace_net.initial_marking()[static_cast<PlaceId>(p)]);

  const auto record = [&](MoveKind kind, std::optional<TransitionId> model_t, std::optional<std::size_t> pos) {
    kinds_.push_back(kind);
    costs_.push_back(kind == MoveKind::Sync || kind == MoveKind::SilentModel ? 0 : 1);
    to_model_.push_back(model_t);
    trace_pos_.push_back(pos);
  };

  for (TransitionId t = 0; t < static_cast<TransitionId>(model_.num_transitions()); ++t) {
    const auto& mt = model_.transition(t);
    b.add_transition("(>>," + mt.name + ")", mt.label, Rational(1), expand_arcs(mt.inputs, 0),
                     expand_arcs(mt.outputs, 0));
    record(mt.silent() ? MoveKind::SilentModel : MoveKind::Model, t, std::nullopt);
  }
  for (std::size_t i = 0; i < trace_.size(); ++i) {
    const auto& tt = trace_net.transition(static_cast<TransitionId>(i));
    b.add_transition("(" + tt.name + ",>>)", tt.label, Rational(1), expand_arcs(tt.inputs, offset),
                     expand_arcs(tt.outputs, offset));
    record(MoveKind::Trace, std::nullopt, i);
  }
  for (std::size_t i = 0; i < trace_.size(); ++i) {
    const auto& tt = trace_net.transition(static_cast<TransitionId>(i));
    for (TransitionId t = 0; t < static_cast<TransitionId>(model_.num_transitions()); ++t) {
      const auto& mt = model_.transition(t);
      if (mt.silent() || *mt.label != trace_[i]) continue;
      b.add_transition("(" + tt.name + "," + mt.name + ")", trace_[i], Rational(1),
                       concat(expand_arcs(mt.inputs, 0), expand_arcs(tt.inputs, offset)),
                       concat(expand_arcs(mt.outputs, 0), expand_arcs(tt.outputs, offset)));
      record(MoveKind::Sync, t, i);
    }
  }
  product_ = b.build();
}

SyncProduct build_sync_product(const Trace& trace, const StochasticNet& model) { return SyncProduct(trace, model); }

MoveKind classify(const SyncProduct& sp, TransitionId t) { return sp.kind(t); }

int move_cost(const SyncProduct& sp, TransitionId t) { return sp.cost(t); }

Marking to_model_marking(const SyncProduct& sp, const Marking& m) {
  if (m.size() != sp.net().num_places()) throw std::invalid_argument("marking does not belong to the product");
  const auto tokens = m.tokens();
  return Marking(std::vector<std::int32_t>(tokens.begin(), tokens.begin() + static_cast<long>(sp.model_place_count())));
}

namespace {

void require_enabled(const SyncProduct& sp, const Marking& m, TransitionId t) {
  if (!is_enabled(sp.net(), m, t))
    throw NotEnabledError("product transition '" + sp.net().transition(t).name + "' is not enabled");
}

}  // namespace

double probability_gain(const SyncProduct& sp, const Marking& m, TransitionId t) {
  require_enabled(sp, m, t);
  const auto model_t = sp.to_model(t);
  if (!model_t) return 1.0;
  return transition_probability(sp.model(), to_model_marking(sp, m), *model_t);
}

Rational probability_gain_exact(const SyncProduct& sp, const Marking& m, TransitionId t) {
  require_enabled(sp, m, t);
  const auto model_t = sp.to_model(t);
  if (!model_t) return Rational(1);
  return transition_probability_exact(sp.model(), to_model_marking(sp, m), *model_t);
}

Alignment make_alignment(const SyncProduct& sp, std::span<const TransitionId> product_transitions, double alpha,
                         bool exact) {
  Alignment out;
  out.alpha = alpha;
  Rational exact_probability = 1;
  Marking m = sp.net().initial_marking();
  for (std::size_t i = 0; i < product_transitions.size(); ++i) {
    const auto t = product_transitions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= sp.net().num_transitions() || !is_enabled(sp.net(), m, t))
      throw InvalidPathError("alignment step " + std::to_string(i) + " is not enabled");
    Move move{sp.kind(t), t, sp.trace_position(t), sp.to_model(t), probability_gain(sp, m, t)};
    if (exact) exact_probability *= probability_gain_exact(sp, m, t);
    out.cost += sp.cost(t);
    out.probability *= move.gain;
    out.log10_probability += std::log10(move.gain);
    out.moves.push_back(move);
    m = fire(sp.net(), m, t);
  }
  if (!is_deadlock(sp.net(), m)) throw InvalidPathError("alignment does not end in a deadlock marking");
  if (exact) {
    out.log10_probability = log10_of(exact_probability);
    out.probability = to_double(exact_probability);
    out.exact_probability = exact_probability;
  }
  out.loss = loss(out.cost, out.log10_probability, LossParams(alpha));
  return out;
}

Trace trace_projection(const SyncProduct& sp, const Alignment& alignment) {
  Trace out;
  for (const auto& mv : alignment.moves)
    if (mv.trace_position) out.push_back(sp.trace()[*mv.trace_position]);
  return out;
}

std::vector<TransitionId> model_projection(const Alignment& alignment) {
  std::vector<TransitionId> out;
  for (const auto& mv : alignment.moves)
    if (mv.model_transition) out.push_back(*mv.model_transition);
  return out;
}

}  // namespace stochalign
