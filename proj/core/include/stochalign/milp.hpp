#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace stochalign::milp {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual, Range };

struct Constraint {
  std::vector<double> coefficients;  ///< one entry per variable
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  double range = 0.0;  ///< Range only: rhs - range <= a x <= rhs
};

/// Bounds of an integer variable. `upper` is a true bound of the model; `cap` is an artificial
/// truncation supplied for termination. At least one of them must be set.
struct IntBounds {
  std::int64_t lower = 0;
  std::optional<std::int64_t> upper;
  std::optional<std::int64_t> cap;
};

/// Integer variables occupy indices [0, num_int_vars), binaries the following num_bin_vars.
struct MilpProblem {
  std::size_t num_int_vars = 0;
  std::size_t num_bin_vars = 0;
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<IntBounds> int_bounds;  ///< size num_int_vars

  std::size_t num_vars() const noexcept { return num_int_vars + num_bin_vars; }
};

enum class MilpStatus {
  Optimal,     ///< provably optimal within the supplied bounds and caps
  Infeasible,  ///< no integral point (within caps)
  CapReached,  ///< optimum found, but some variable sits on its cap
  NodeLimit,   ///< branch-and-bound node budget exhausted; best_bound is still valid
};

const char* to_string(MilpStatus status) noexcept;

struct SolverOptions {
  bool relax_integrality = false;
  std::size_t max_nodes = 20000;
  bool record_nodes = false;
};

/// One solved branch-and-bound node: the variable box and its LP relaxation value.
struct NodeRecord {
  std::vector<double> lower;
  std::vector<double> upper;
  bool feasible = false;
  double lp_value = 0.0;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<std::int64_t> values;  ///< integral solution (empty when relaxed or infeasible)
  std::vector<double> relaxed_values;
  double objective_value = 0.0;
  double root_bound = 0.0;  ///< LP relaxation at the root
  double best_bound = 0.0;  ///< proven bound on the optimum (equals objective_value when Optimal)
  std::size_t nodes = 0;
  std::vector<NodeRecord> node_log;  ///< filled when SolverOptions::record_nodes
};

/// Branch-and-bound over a bounded dual simplex. Most-fractional branching, best-bound node
/// selection. Throws MalformedProblemError for inconsistent dimensions, uncapped integers, or
/// inverted bounds.
MilpSolution solve(const MilpProblem& problem, const SolverOptions& options = {});

/// Solver for a family of problems sharing matrix, objective and bounds and differing only in
/// constraint right-hand sides. Every solve starts from the last simplex basis, which stays
/// dual feasible because all variables are boxed. Not thread-safe; use one per thread.
class Solver {
 public:
  explicit Solver(const MilpProblem& problem, SolverOptions options = {});
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;
  ~Solver();

  /// Solves with the right-hand sides of the problem given at construction.
  MilpSolution solve();
  /// Solves with `rhs` (one value per constraint, same order and relations).
  MilpSolution solve(std::span<const double> rhs);

  std::size_t pivots() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stochalign::milp
