#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stochalign/milp.hpp"
#include "stochalign/sync_product.hpp"

namespace stochalign {

struct HeuristicConfig {
  /// Per-variable cap on firing counts; default |trace| + |model places| + |M0| + loop allowance.
  std::optional<std::int64_t> cap;
  /// Loop allowance added to the default cap; default 2 * |model transitions|.
  std::optional<std::int64_t> loop_allowance;
  /// Solve the LP relaxation only (still admissible, usually weaker).
  bool lp_relaxation = false;
  /// Branch-and-bound node limit per program. On reaching it the proven bound is used, which is
  /// still admissible but carries no solution vector.
  std::size_t max_nodes = 256;
};

/// Value of one heuristic at one marking: h_d, or log10 h_p for the probability side.
struct HeuristicResult {
  double value = 0.0;
  /// Firing counts per product transition: the optimal solution, or the whole part of the
  /// relaxation when only a bound is known. Empty on fallback.
  std::vector<std::int64_t> parikh;
  bool exact_hint = false;  ///< true when `parikh` is a provably optimal integral solution
  milp::MilpStatus status = milp::MilpStatus::Optimal;
};

/// Big-M linearisation of "no product transition is enabled at M_d".
///
/// A transition whose preset contains another transition's preset is disabled whenever that
/// other transition is, so only the minimal presets are guarded. A guarded transition with a
/// single input place becomes the plain bound M_d(p) <= F(p,t) - 1; the others receive one
/// indicator y(t,p) per input place with sum_p y(t,p) >= 1 and
/// M_d(p) <= F(p,t) - 1 + big_m(p) * (1 - y(t,p)).
struct DeadlockEncoding {
  struct Indicator {
    TransitionId transition;
    PlaceId place;
    std::int32_t required;  ///< F(p,t)
  };
  std::vector<TransitionId> guarded;
  std::vector<std::pair<PlaceId, std::int32_t>> place_bounds;  ///< (p, max tokens allowed in M_d)
  std::vector<Indicator> indicators;
  std::vector<std::int64_t> big_m;  ///< per product place
  bool unsatisfiable = false;       ///< some transition has an empty preset
};

/// Static per-transition upper bound on the probability gain: 1 for trace moves, otherwise
/// w(t_s) / sum of w(t') over model transitions whose preset is contained in the preset of t_s.
std::vector<double> build_gain_bounds(const SyncProduct& sp);
std::vector<Rational> build_gain_bounds_exact(const SyncProduct& sp);

/// Precomputed matrices and encodings for the two MILP heuristics over one product.
/// Immutable after construction; safe to share between threads.
class HeuristicModel {
 public:
  explicit HeuristicModel(const SyncProduct& sp, HeuristicConfig config = {});

  std::int64_t cap() const noexcept { return cap_; }
  const std::vector<double>& log_gain_bounds() const noexcept { return log_gain_bounds_; }
  const Matrices& matrices() const noexcept { return matrices_; }
  const SyncProduct& product() const noexcept { return *sp_; }

  /// Encoding for markings with at most `allowance[p]` tokens per product place; the big-M
  /// values depend on the allowance only.
  DeadlockEncoding deadlock_encoding(const std::vector<std::int64_t>& allowance) const;
  DeadlockEncoding deadlock_encoding(const Marking& m) const;

  enum class Objective { EditDistance, ProbabilityGain };
  milp::MilpProblem problem(const Marking& m, Objective objective) const;
  milp::MilpProblem problem(const Marking& m, Objective objective, const std::vector<std::int64_t>& allowance) const;
  /// Right-hand sides of problem(m, *, allowance), row by row. Requires m[p] <= allowance[p].
  std::vector<double> rhs(const Marking& m, const std::vector<std::int64_t>& allowance) const;

  /// Lower bound on the remaining move cost from m to any product deadlock.
  HeuristicResult edit_distance(const Marking& m) const;
  /// Upper bound (log10) on the remaining probability gain from m to any product deadlock.
  HeuristicResult probability_gain(const Marking& m) const;

  /// Value of a marking that needs no program (deadlocks, nets without any deadlock).
  std::optional<HeuristicResult> trivial(const Marking& m) const;
  HeuristicResult interpret(const milp::MilpSolution& solution, Objective objective) const;
  milp::SolverOptions solver_options() const;

 private:
  HeuristicResult run(const Marking& m, Objective objective) const;
  std::vector<milp::Constraint> rows(const DeadlockEncoding& enc, std::size_t vars) const;
  std::vector<std::optional<std::int32_t>> place_limits(const DeadlockEncoding& enc) const;

  const SyncProduct* sp_;
  HeuristicConfig config_;
  Matrices matrices_;
  std::int64_t cap_ = 0;
  std::vector<double> log_gain_bounds_;
  std::vector<TransitionId> guarded_;
  std::vector<std::int64_t> positive_row_sum_;
  std::vector<bool> can_drain_;  ///< place has a negative incidence entry
  bool empty_preset_ = false;
};

/// Evaluates both heuristics over many markings of one product, reusing one warm-started solver
/// per objective. Big-M values come from a per-place token allowance that grows (and triggers a
/// rebuild) when a marking exceeds it. Not thread-safe.
class HeuristicEvaluator {
 public:
  explicit HeuristicEvaluator(const HeuristicModel& model);
  ~HeuristicEvaluator();

  HeuristicResult edit_distance(const Marking& m);
  HeuristicResult probability_gain(const Marking& m);
  std::size_t rebuilds() const noexcept { return rebuilds_; }

 private:
  HeuristicResult evaluate(const Marking& m, HeuristicModel::Objective objective);

  const HeuristicModel* model_;
  std::vector<std::int64_t> allowance_;
  std::optional<milp::Solver> solvers_[2];
  std::size_t rebuilds_ = 0;
};

HeuristicResult edit_distance_heuristic(const SyncProduct& sp, const Marking& m, std::optional<std::int64_t> cap = {});
HeuristicResult probability_gain_heuristic(const SyncProduct& sp, const Marking& m,
                                           std::optional<std::int64_t> cap = {});

}  // namespace stochalign
