#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stochalign/net.hpp"
#include "stochalign/sync_product.hpp"

namespace stochalign::oracle {

/// Limits for brute-force path enumeration.
struct EnumerationBudget {
  std::size_t max_path_len = 32;  ///< silent transitions count too
  double min_log_prob = -12.0;    ///< prefixes with a smaller log10 probability are cut
  std::size_t max_paths = 200'000;

  /// Throws DomainError unless all limits are positive and finite.
  void validate() const;
};

struct EnumeratedPath {
  ModelPath path;
  Rational probability;
  double log10_probability = 0.0;
};

struct Enumeration {
  std::vector<EnumeratedPath> paths;  ///< depth-first order, lower transition index first
  bool truncated = false;             ///< some budget limit cut the search
};

/// All model paths (M0 to a deadlock) within the budget, with exact probabilities.
Enumeration enumerate_paths(const StochasticNet& net, const EnumerationBudget& budget = {});

/// Insert/delete-only edit distance |a| + |b| - 2 LCS(a, b).
std::size_t lcs_edit_distance(std::span<const Activity> a, std::span<const Activity> b);

struct PathScore {
  ModelPath path;
  std::size_t distance = 0;
  Rational probability;
  double log10_probability = 0.0;
  double loss = 0.0;
};

struct BestPath {
  PathScore best;
  bool truncated = false;  ///< enumeration was incomplete; the result may not be the true optimum
};

/// Loss-minimising enumerated path (first in enumeration order on ties). Distances ignore silent
/// transitions. Throws Error when no path was enumerated.
BestPath oracle_best(const StochasticNet& net, const Trace& trace, double alpha, const EnumerationBudget& budget = {});

struct ParetoFront {
  std::vector<PathScore> entries;  ///< sorted by distance, then decreasing probability; loss unset
  bool truncated = false;
};

/// Paths not dominated under (minimise distance, maximise probability).
ParetoFront pareto_front(const StochasticNet& net, const Trace& trace, const EnumerationBudget& budget = {});

/// One non-dominated completion in the synchronous product.
struct ProductLabel {
  int cost = 0;
  Rational gain;  ///< product of probability gains
  double log10_gain = 0.0;
  std::vector<TransitionId> moves;
};

struct ProductFront {
  std::vector<ProductLabel> entries;  ///< sorted by cost, then decreasing gain
  bool complete = true;               ///< false when the label limit was hit
};

/// Exact Pareto front of (move cost, probability gain) over all firing sequences of the product
/// from `from` to a product deadlock. Bi-criteria label setting over the reachable product state
/// space, so nets with loops are handled exactly.
ProductFront product_pareto_front(const SyncProduct& sp, const Marking& from, std::size_t max_labels = 2'000'000);

/// Minimum loss of a completion when cost `g_distance` and gain `log10_g_gain` were already
/// accumulated. Uses exact log10 of rational gains.
double best_loss(const ProductFront& front, double alpha, int g_distance = 0, double log10_g_gain = 0.0);

}  // namespace stochalign::oracle
