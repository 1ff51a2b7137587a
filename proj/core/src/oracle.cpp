#include "stochalign/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "stochalign/errors.hpp"
#include "stochalign/loss.hpp"

namespace stochalign::oracle {

void EnumerationBudget::validate() const {
  if (max_path_len == 0 || max_paths == 0) throw DomainError("enumeration limits must be positive");
  if (!std::isfinite(min_log_prob) || min_log_prob >= 0.0)
    throw DomainError("min_log_prob must be a finite negative number");
}

namespace {

struct Enumerator {
  const StochasticNet& net;
  const EnumerationBudget& budget;
  Enumeration out;
  std::vector<TransitionId> path;
  std::vector<Marking> markings;

  void visit(const Rational& probability) {
    if (out.paths.size() >= budget.max_paths) {
      out.truncated = true;
      return;
    }
    const Marking m = markings.back();
    const auto enabled = enabled_transitions(net, m);
    if (enabled.empty()) {
      out.paths.push_back({ModelPath{path, markings}, probability, log10_of(probability)});
      return;
    }
    if (path.size() >= budget.max_path_len) {
      out.truncated = true;
      return;
    }
    Rational total = 0;
    for (auto t : enabled) total += net.transition(t).weight;
    for (auto t : enabled) {
      const Rational next = probability * net.transition(t).weight / total;
      if (log10_of(next) < budget.min_log_prob) {
        out.truncated = true;
        continue;
      }
      path.push_back(t);
      markings.push_back(fire(net, m, t));
      visit(next);
      markings.pop_back();
      path.pop_back();
      if (out.paths.size() >= budget.max_paths) {
        out.truncated = true;
        return;
      }
    }
  }
};

std::vector<Activity> visible_labels(const StochasticNet& net, const ModelPath& path) {
  return label_projection(net, path.transitions);
}

}  // namespace

Enumeration enumerate_paths(const StochasticNet& net, const EnumerationBudget& budget) {
  budget.validate();
  Enumerator e{net, budget, {}, {}, {net.initial_marking()}};
  e.visit(Rational(1));
  return std::move(e.out);
}

std::size_t lcs_edit_distance(std::span<const Activity> a, std::span<const Activity> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return a.size() + b.size() - 2 * prev[b.size()];
}

BestPath oracle_best(const StochasticNet& net, const Trace& trace, double alpha, const EnumerationBudget& budget) {
  const LossParams params(alpha);
  const auto paths = enumerate_paths(net, budget);
  if (paths.paths.empty()) throw Error("enumeration found no model path within the budget");
  BestPath out;
  out.truncated = paths.truncated;
  bool first = true;
  for (const auto& p : paths.paths) {
    const auto d = lcs_edit_distance(trace, visible_labels(net, p.path));
    const double l = loss(static_cast<double>(d), p.log10_probability, params);
    if (first || l < out.best.loss) {
      out.best = {p.path, d, p.probability, p.log10_probability, l};
      first = false;
    }
  }
  return out;
}

ParetoFront pareto_front(const StochasticNet& net, const Trace& trace, const EnumerationBudget& budget) {
  const auto paths = enumerate_paths(net, budget);
  std::vector<PathScore> scored;
  for (const auto& p : paths.paths)
    scored.push_back(
        {p.path, lcs_edit_distance(trace, visible_labels(net, p.path)), p.probability, p.log10_probability, 0.0});
  std::stable_sort(scored.begin(), scored.end(), [](const PathScore& x, const PathScore& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    return x.probability > y.probability;
  });
  ParetoFront out;
  out.truncated = paths.truncated;
  // After sorting, an entry survives when no earlier entry has a strictly larger probability, or
  // it ties the best pair exactly.
  for (const auto& s : scored) {
    bool dominated = false;
    for (const auto& kept : out.entries) {
      const bool weakly = kept.distance <= s.distance && kept.probability >= s.probability;
      const bool strictly = kept.distance < s.distance || kept.probability > s.probability;
      if (weakly && strictly) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.entries.push_back(s);
  }
  return out;
}

ProductFront product_pareto_front(const SyncProduct& sp, const Marking& from, std::size_t max_labels) {
  const auto& net = sp.net();
  struct Label {
    std::size_t state;
    int cost;
    Rational gain;
    std::int64_t parent;
    TransitionId move;
  };
  std::vector<Label> labels;
  std::vector<Marking> states;
  std::unordered_map<Marking, std::size_t, MarkingHash> state_ids;
  std::vector<std::optional<Rational>> best_settled;  // largest settled gain per state

  const auto state_of = [&](const Marking& m) {
    auto [it, inserted] = state_ids.emplace(m, states.size());
    if (inserted) {
      states.push_back(m);
      best_settled.emplace_back();
    }
    return it->second;
  };

  // Lexicographic: cost ascending, gain descending, then creation order.
  const auto worse = [&](std::size_t a, std::size_t b) {
    const auto& x = labels[a];
    const auto& y = labels[b];
    if (x.cost != y.cost) return x.cost > y.cost;
    if (x.gain != y.gain) return x.gain < y.gain;
    return a > b;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> open(worse);

  labels.push_back({state_of(from), 0, Rational(1), -1, -1});
  open.push(0);

  ProductFront out;
  std::vector<std::size_t> goals;
  while (!open.empty()) {
    const auto li = open.top();
    open.pop();
    const std::size_t s = labels[li].state;
    // Every later label at s costs at least as much, so it survives only with a larger gain.
    if (best_settled[s] && labels[li].gain <= *best_settled[s]) continue;
    best_settled[s] = labels[li].gain;

    const Marking m = states[s];
    const auto enabled = enabled_transitions(net, m);
    if (enabled.empty()) {
      goals.push_back(li);
      continue;
    }
    if (labels.size() >= max_labels) {
      out.complete = false;
      break;
    }
    for (auto t : enabled) {
      const Marking next = fire(net, m, t);
      const std::size_t ns = state_of(next);
      Rational gain = labels[li].gain * probability_gain_exact(sp, m, t);
      const int cost = labels[li].cost + sp.cost(t);
      if (best_settled[ns] && gain <= *best_settled[ns]) continue;
      labels.push_back({ns, cost, std::move(gain), static_cast<std::int64_t>(li), t});
      open.push(labels.size() - 1);
    }
  }

  std::sort(goals.begin(), goals.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a].cost != labels[b].cost) return labels[a].cost < labels[b].cost;
    if (labels[a].gain != labels[b].gain) return labels[a].gain > labels[b].gain;
    return a < b;
  });
  std::optional<Rational> best_gain;
  for (auto g : goals) {
    if (best_gain && labels[g].gain <= *best_gain) continue;
    best_gain = labels[g].gain;
    ProductLabel entry;
    entry.cost = labels[g].cost;
    entry.gain = labels[g].gain;
    entry.log10_gain = log10_of(entry.gain);
    for (auto i = static_cast<std::int64_t>(g); labels[static_cast<std::size_t>(i)].parent >= 0;
         i = labels[static_cast<std::size_t>(i)].parent)
      entry.moves.push_back(labels[static_cast<std::size_t>(i)].move);
    std::reverse(entry.moves.begin(), entry.moves.end());
    out.entries.push_back(std::move(entry));
  }
  return out;
}

double best_loss(const ProductFront& front, double alpha, int g_distance, double log10_g_gain) {
  const LossParams params(alpha);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : front.entries)
    best = std::min(best, loss(static_cast<double>(g_distance + e.cost), log10_g_gain + e.log10_gain, params));
  return best;
}

}  // namespace stochalign::oracle
