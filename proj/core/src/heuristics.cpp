#include "stochalign/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stochalign/errors.hpp"

namespace stochalign {

namespace {

/// Multiset inclusion of presets: every input arc of `inner` is covered by `outer`.
bool preset_within(const Transition& inner, const Transition& outer) {
  for (const auto& a : inner.inputs) {
    const auto it = std::find_if(outer.inputs.begin(), outer.inputs.end(),
                                 [&](const Arc& b) { return b.place == a.place; });
    if (it == outer.inputs.end() || it->multiplicity < a.multiplicity) return false;
  }
  return true;
}

}  // namespace

std::vector<Rational> build_gain_bounds_exact(const SyncProduct& sp) {
  const auto& model = sp.model();
  std::vector<Rational> model_bound(model.num_transitions());
  for (TransitionId t = 0; t < static_cast<TransitionId>(model.num_transitions()); ++t) {
    Rational co_enabled = 0;
    for (TransitionId u = 0; u < static_cast<TransitionId>(model.num_transitions()); ++u)
      if (preset_within(model.transition(u), model.transition(t))) co_enabled += model.transition(u).weight;
    model_bound[static_cast<std::size_t>(t)] = model.transition(t).weight / co_enabled;
  }
  std::vector<Rational> out;
  out.reserve(sp.net().num_transitions());
  for (TransitionId t = 0; t < static_cast<TransitionId>(sp.net().num_transitions()); ++t) {
    const auto model_t = sp.to_model(t);
    out.push_back(model_t ? model_bound[static_cast<std::size_t>(*model_t)] : Rational(1));
  }
  return out;
}

std::vector<double> build_gain_bounds(const SyncProduct& sp) {
  std::vector<double> out;
  for (const auto& r : build_gain_bounds_exact(sp)) out.push_back(to_double(r));
  return out;
}

HeuristicModel::HeuristicModel(const SyncProduct& sp, HeuristicConfig config)
    : sp_(&sp), config_(config), matrices_(stochalign::matrices(sp.net())) {
  const auto& model = sp.model();
  const std::int64_t loops = config_.loop_allowance.value_or(2 * static_cast<std::int64_t>(model.num_transitions()));
  cap_ = config_.cap.value_or(static_cast<std::int64_t>(sp.trace_length() + model.num_places()) +
                              model.initial_marking().total() + loops);
  cap_ = std::max<std::int64_t>(cap_, 1);

  for (const auto& r : build_gain_bounds_exact(sp)) log_gain_bounds_.push_back(log10_of(r));

  const auto& net = sp.net();
  const auto transitions = static_cast<TransitionId>(net.num_transitions());
  for (TransitionId t = 0; t < transitions; ++t) {
    const auto& tr = net.transition(t);
    if (tr.inputs.empty()) empty_preset_ = true;
    bool implied = false;
    for (TransitionId u = 0; u < transitions && !implied; ++u) {
      if (u == t) continue;
      const auto& other = net.transition(u);
      if (!preset_within(other, tr)) continue;
      // Equal presets: keep the lowest index as representative.
      implied = !preset_within(tr, other) || u < t;
    }
    if (!implied) guarded_.push_back(t);
  }

  positive_row_sum_.assign(matrices_.places, 0);
  can_drain_.assign(matrices_.places, false);
  for (std::size_t p = 0; p < matrices_.places; ++p) {
    for (std::size_t t = 0; t < matrices_.transitions; ++t) {
      const auto v = matrices_.incidence[p * matrices_.transitions + t];
      if (v > 0) positive_row_sum_[p] += v;
      if (v < 0) can_drain_[p] = true;
    }
  }
}

DeadlockEncoding HeuristicModel::deadlock_encoding(const std::vector<std::int64_t>& allowance) const {
  if (allowance.size() != matrices_.places) throw DomainError("token allowance has the wrong size");
  DeadlockEncoding enc;
  enc.guarded = guarded_;
  enc.unsatisfiable = empty_preset_;
  enc.big_m.resize(matrices_.places);
  for (std::size_t p = 0; p < matrices_.places; ++p) enc.big_m[p] = allowance[p] + cap_ * positive_row_sum_[p];

  std::map<PlaceId, std::int32_t> bounds;
  for (auto t : guarded_) {
    const auto& inputs = sp_->net().transition(t).inputs;
    if (inputs.size() == 1) {
      const auto limit = inputs.front().multiplicity - 1;
      auto [it, inserted] = bounds.emplace(inputs.front().place, limit);
      if (!inserted) it->second = std::min(it->second, limit);
    } else {
      for (const auto& a : inputs) enc.indicators.push_back({t, a.place, a.multiplicity});
    }
  }
  enc.place_bounds.assign(bounds.begin(), bounds.end());
  return enc;
}

namespace {

std::vector<std::int64_t> tokens_of(const Marking& m, std::size_t places) {
  std::vector<std::int64_t> out(places);
  for (std::size_t p = 0; p < places; ++p) out[p] = m[static_cast<PlaceId>(p)];
  return out;
}

}  // namespace

DeadlockEncoding HeuristicModel::deadlock_encoding(const Marking& m) const {
  return deadlock_encoding(tokens_of(m, matrices_.places));
}

std::vector<std::optional<std::int32_t>> HeuristicModel::place_limits(const DeadlockEncoding& enc) const {
  std::vector<std::optional<std::int32_t>> out(matrices_.places);
  for (const auto& [p, limit] : enc.place_bounds) out[static_cast<std::size_t>(p)] = limit;
  return out;
}

// Rows with the marking moved to the right-hand side; rhs() fills in the actual values.
std::vector<milp::Constraint> HeuristicModel::rows(const DeadlockEncoding& enc, std::size_t vars) const {
  using milp::Relation;
  const std::size_t tn = matrices_.transitions;
  const auto marking_row = [&](std::size_t p) {
    std::vector<double> row(vars, 0.0);
    for (std::size_t t = 0; t < tn; ++t) row[t] = matrices_.incidence[p * tn + t];
    return row;
  };

  std::vector<milp::Constraint> out;
  // 0 <= M_d(p) = M(p) + I x, merged with M_d(p) <= limit where a single-input transition needs it.
  const auto limits = place_limits(enc);
  for (std::size_t p = 0; p < matrices_.places; ++p) {
    const auto limit = limits[p];
    if (limit && can_drain_[p]) {
      out.push_back(*limit == 0 ? milp::Constraint{marking_row(p), Relation::Equal, 0.0}
                                : milp::Constraint{marking_row(p), Relation::Range, 0.0, static_cast<double>(*limit)});
    } else if (limit) {
      out.push_back({marking_row(p), Relation::LessEqual, 0.0});
    } else if (can_drain_[p]) {
      out.push_back({marking_row(p), Relation::GreaterEqual, 0.0});
    }
  }

  std::map<TransitionId, std::vector<std::size_t>> indicators_of;
  for (std::size_t k = 0; k < enc.indicators.size(); ++k) {
    const auto& ind = enc.indicators[k];
    const std::size_t y = tn + k;
    auto row = marking_row(static_cast<std::size_t>(ind.place));
    row[y] = static_cast<double>(enc.big_m[static_cast<std::size_t>(ind.place)]);
    out.push_back({std::move(row), Relation::LessEqual, 0.0});
    indicators_of[ind.transition].push_back(y);
  }
  for (const auto& [t, ys] : indicators_of) {
    std::vector<double> row(vars, 0.0);
    for (auto y : ys) row[y] = 1.0;
    out.push_back({std::move(row), Relation::GreaterEqual, 1.0});
  }
  return out;
}

std::vector<double> HeuristicModel::rhs(const Marking& m, const std::vector<std::int64_t>& allowance) const {
  const auto enc = deadlock_encoding(allowance);
  const auto tokens = [&](PlaceId p) { return static_cast<double>(m[p]); };
  std::vector<double> out;
  const auto limits = place_limits(enc);
  for (std::size_t p = 0; p < matrices_.places; ++p) {
    const auto tp = tokens(static_cast<PlaceId>(p));
    if (limits[p])
      out.push_back(static_cast<double>(*limits[p]) - tp);
    else if (can_drain_[p])
      out.push_back(-tp);
  }
  std::map<TransitionId, int> transitions;
  for (const auto& ind : enc.indicators) {
    out.push_back(static_cast<double>(ind.required - 1) - tokens(ind.place) +
                  static_cast<double>(enc.big_m[static_cast<std::size_t>(ind.place)]));
    transitions[ind.transition] = 1;
  }
  out.insert(out.end(), transitions.size(), 1.0);
  return out;
}

milp::MilpProblem HeuristicModel::problem(const Marking& m, Objective objective,
                                          const std::vector<std::int64_t>& allowance) const {
  const auto enc = deadlock_encoding(allowance);
  const std::size_t tn = matrices_.transitions;
  milp::MilpProblem prob;
  prob.num_int_vars = tn;
  prob.num_bin_vars = enc.indicators.size();
  const std::size_t n = prob.num_vars();

  prob.sense = objective == Objective::EditDistance ? milp::Sense::Minimize : milp::Sense::Maximize;
  prob.objective.assign(n, 0.0);
  for (std::size_t t = 0; t < tn; ++t)
    prob.objective[t] = objective == Objective::EditDistance ? sp_->cost(static_cast<TransitionId>(t))
                                                             : log_gain_bounds_[t];
  prob.int_bounds.assign(tn, milp::IntBounds{0, std::nullopt, cap_});
  prob.constraints = rows(enc, n);
  const auto values = rhs(m, allowance);
  for (std::size_t i = 0; i < values.size(); ++i) prob.constraints[i].rhs = values[i];
  return prob;
}

milp::MilpProblem HeuristicModel::problem(const Marking& m, Objective objective) const {
  return problem(m, objective, tokens_of(m, matrices_.places));
}

std::optional<HeuristicResult> HeuristicModel::trivial(const Marking& m) const {
  HeuristicResult out;
  if (is_deadlock(sp_->net(), m)) {
    out.parikh.assign(matrices_.transitions, 0);
    out.exact_hint = true;
    return out;
  }
  if (empty_preset_) {
    // No deadlock is reachable at all; keep the conservative value.
    out.status = milp::MilpStatus::Infeasible;
    return out;
  }
  return std::nullopt;
}

milp::SolverOptions HeuristicModel::solver_options() const {
  milp::SolverOptions options;
  options.relax_integrality = config_.lp_relaxation;
  options.max_nodes = config_.max_nodes;
  return options;
}

HeuristicResult HeuristicModel::interpret(const milp::MilpSolution& solution, Objective objective) const {
  HeuristicResult out;
  out.status = solution.status;
  const bool minimize = objective == Objective::EditDistance;
  const auto clamp_value = [&](double v) {
    // Move costs are integral, so a fractional lower bound may be rounded up.
    return minimize ? std::max(0.0, std::ceil(v - 1e-6)) : std::min(0.0, v);
  };

  // Whole firings of the root relaxation. A child reached by one of them inherits this value
  // minus the step, which is the exact relaxation value there and a valid bound in any case.
  const auto floor_relaxed = [&] {
    if (solution.relaxed_values.size() < matrices_.transitions) return;
    out.parikh.resize(matrices_.transitions);
    for (std::size_t t = 0; t < matrices_.transitions; ++t)
      out.parikh[t] = static_cast<std::int64_t>(std::floor(solution.relaxed_values[t] + 1e-6));
  };

  switch (solution.status) {
    case milp::MilpStatus::Optimal:
      out.value = clamp_value(solution.objective_value);
      if (!config_.lp_relaxation) {
        out.parikh.assign(solution.values.begin(), solution.values.begin() + static_cast<long>(matrices_.transitions));
        out.exact_hint = true;
      } else {
        floor_relaxed();
      }
      break;
    case milp::MilpStatus::NodeLimit:
      out.value = clamp_value(solution.best_bound);
      floor_relaxed();
      break;
    case milp::MilpStatus::CapReached:
    case milp::MilpStatus::Infeasible:
      out.value = 0.0;
      break;
  }
  return out;
}

HeuristicResult HeuristicModel::run(const Marking& m, Objective objective) const {
  if (auto t = trivial(m)) return *t;
  return interpret(milp::solve(problem(m, objective), solver_options()), objective);
}

HeuristicResult HeuristicModel::edit_distance(const Marking& m) const { return run(m, Objective::EditDistance); }

HeuristicResult HeuristicModel::probability_gain(const Marking& m) const {
  return run(m, Objective::ProbabilityGain);
}

HeuristicEvaluator::HeuristicEvaluator(const HeuristicModel& model) : model_(&model) {
  const auto& m0 = model.product().net().initial_marking();
  allowance_.resize(model.matrices().places);
  for (std::size_t p = 0; p < allowance_.size(); ++p)
    allowance_[p] = std::max<std::int64_t>(m0[static_cast<PlaceId>(p)], 1);
}

HeuristicEvaluator::~HeuristicEvaluator() = default;

HeuristicResult HeuristicEvaluator::evaluate(const Marking& m, HeuristicModel::Objective objective) {
  if (auto t = model_->trivial(m)) return *t;
  bool grown = false;
  for (std::size_t p = 0; p < allowance_.size(); ++p) {
    const std::int64_t tokens = m[static_cast<PlaceId>(p)];
    if (tokens > allowance_[p]) {
      allowance_[p] = std::max(tokens, 2 * allowance_[p]);
      grown = true;
    }
  }
  if (grown) {
    for (auto& s : solvers_) s.reset();
    ++rebuilds_;
  }
  auto& solver = solvers_[objective == HeuristicModel::Objective::EditDistance ? 0 : 1];
  if (!solver) {
    solver.emplace(model_->problem(m, objective, allowance_), model_->solver_options());
    return model_->interpret(solver->solve(), objective);
  }
  return model_->interpret(solver->solve(model_->rhs(m, allowance_)), objective);
}

HeuristicResult HeuristicEvaluator::edit_distance(const Marking& m) {
  return evaluate(m, HeuristicModel::Objective::EditDistance);
}

HeuristicResult HeuristicEvaluator::probability_gain(const Marking& m) {
  return evaluate(m, HeuristicModel::Objective::ProbabilityGain);
}

HeuristicResult edit_distance_heuristic(const SyncProduct& sp, const Marking& m, std::optional<std::int64_t> cap) {
  HeuristicConfig config;
  config.cap = cap;
  return HeuristicModel(sp, config).edit_distance(m);
}

HeuristicResult probability_gain_heuristic(const SyncProduct& sp, const Marking& m,
                                           std::optional<std::int64_t> cap) {
  HeuristicConfig config;
  config.cap = cap;
  return HeuristicModel(sp, config).probability_gain(m);
}

}  // namespace stochalign
