#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "stochalign/errors.hpp"
#include "stochalign/heuristics.hpp"
#include "stochalign/loss.hpp"
#include "stochalign/sync_product.hpp"

namespace stochalign {

/// Heuristic values and scores of one node at the moment it is expanded.
struct ExpansionRecord {
  Marking marking;
  int g_distance = 0;
  double log10_g_probability = 0.0;
  double h_distance = 0.0;
  double log10_h_probability = 0.0;
  double f = 0.0;
  std::vector<TransitionId> prefix;  ///< product transitions from the initial marking
};

struct SearchConfig {
  double alpha = 1.0;
  std::size_t node_budget = 5'000'000;
  HeuristicConfig heuristic;
  std::size_t cache_size = 100'000;
  /// Report the exact rational probability of the result (requires rational weights; always true
  /// for nets parsed from text).
  bool rational = false;
  /// Estimate child heuristics from the parent's solution and solve the MILPs only when a node
  /// is dequeued with an estimate.
  bool lazy_heuristics = true;
  /// Verify after the run that no dequeued score exceeded the final loss (throws std::logic_error).
  bool check_invariants = false;
  std::function<void(const ExpansionRecord&)> on_expand;
};

struct SearchStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  std::size_t pruned = 0;
  std::size_t requeued = 0;
  std::size_t milp_solves = 0;
  std::size_t markings = 0;
  double runtime_ms = 0.0;
};

struct SearchResult {
  Alignment alignment;
  SearchStats stats;
};

/// The node budget ran out before a deadlock was dequeued.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& message, std::optional<Alignment> incumbent, SearchStats stats)
      : Error(message), incumbent_(std::move(incumbent)), stats_(stats) {}

  /// Best complete alignment generated before the budget ran out, if any (not proven optimal).
  const std::optional<Alignment>& incumbent() const noexcept { return incumbent_; }
  const SearchStats& stats() const noexcept { return stats_; }

 private:
  std::optional<Alignment> incumbent_;
  SearchStats stats_;
};

/// No deadlock of the product is reachable from its initial marking.
class NoDeadlockError : public Error {
 public:
  using Error::Error;
};

/// Best-first search over product markings ordered by f = loss(g_d + h_d, g_p * h_p).
///
/// Each node carries the accumulated move cost g_d and log10 probability gain g_p. A marking may
/// be expanded once per Pareto-incomparable (g_d, g_p) pair; arrivals dominated by a stored pair
/// are dropped. The goal test happens when a node is dequeued.
class AlignmentSearch {
 public:
  struct Node {
    std::uint32_t marking = 0;
    int g_distance = 0;
    double log10_g_probability = 0.0;
    double h_distance = 0.0;
    double log10_h_probability = 0.0;
    double f = 0.0;
    std::int64_t parent = -1;
    TransitionId move = -1;
    std::uint64_t seq = 0;
    bool distance_exact = false;
    bool probability_exact = false;
    bool superseded = false;
  };

  AlignmentSearch(const SyncProduct& sp, SearchConfig config);
  ~AlignmentSearch();

  /// Creates the root node (once) and returns its index.
  std::size_t initial_node();

  /// Generates one child per enabled product transition, skipping dominated arrivals. Returns
  /// the indices of the emitted children. Throws std::logic_error on a deadlock node.
  std::vector<std::size_t> expand(std::size_t node);

  /// Runs to completion. Throws BudgetExceededError or NoDeadlockError.
  SearchResult run();

  const Node& node(std::size_t index) const { return nodes_.at(index); }
  const Marking& marking_of(std::size_t index) const;
  std::vector<TransitionId> moves_to(std::size_t index) const;
  const SearchStats& stats() const noexcept { return stats_; }

 private:
  struct HeuristicEntry;
  struct Cache;

  std::uint32_t intern(Marking m);
  void ensure_heuristics(Node& node);
  void derive_heuristics(const Node& parent, Node& child, TransitionId t, double gain);
  double score(const Node& n) const;
  bool dominated(const Node& candidate) const;
  void store(std::size_t index);
  Alignment build_alignment(std::size_t index) const;
  void push(std::size_t index);

  const SyncProduct& sp_;
  SearchConfig config_;
  LossParams params_;
  HeuristicModel heuristics_;
  HeuristicEvaluator evaluator_;
  std::vector<Node> nodes_;
  std::vector<Marking> markings_;
  std::unordered_map<Marking, std::uint32_t, MarkingHash> marking_ids_;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> frontier_;  // non-dominated nodes per marking
  std::unique_ptr<Cache> cache_;
  struct OpenEntry {
    double f;
    int g_distance;
    std::uint64_t seq;
    std::size_t node;
  };
  struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const;
  };
  std::vector<OpenEntry> open_;
  std::uint64_t seq_ = 0;
  std::optional<std::size_t> root_;
  std::optional<std::size_t> best_goal_;
  SearchStats stats_;
};

SearchResult stochastic_alignment(const SyncProduct& sp, const SearchConfig& config);
SearchResult stochastic_alignment(const StochasticNet& net, const Trace& trace, const SearchConfig& config);

}  // namespace stochalign
