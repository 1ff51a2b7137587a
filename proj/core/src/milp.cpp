#include "stochalign/milp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <string>

#include "stochalign/errors.hpp"

namespace stochalign::milp {

const char* to_string(MilpStatus status) noexcept {
  switch (status) {
    case MilpStatus::Optimal:
      return "optimal";
    case MilpStatus::Infeasible:
      return "infeasible";
    case MilpStatus::CapReached:
      return "cap-reached";
    case MilpStatus::NodeLimit:
      return "node-limit";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kIntTol = 1e-6;
constexpr std::size_t kRefactorEvery = 64;

enum class LpStatus { Optimal, Infeasible, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// Simplex state after solving one node, restored before solving its children.
struct Basis {
  std::vector<std::size_t> head;
  std::vector<std::uint8_t> at_upper;
  std::vector<double> d;
  std::vector<double> binv;
  std::size_t since_refactor = 0;
};

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  LpResult lp;
  std::size_t depth = 0;
  std::size_t seq = 0;
  double key = 0.0;  // bound, rounded up for integral objectives
  std::shared_ptr<const Basis> basis;
};

constexpr std::size_t kSnapshotBudget = std::size_t{64} << 20;  // bytes of saved bases per solve

// Best bound first; among equal keys the deepest node, which dives towards integral leaves.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.key != b.key) return a.key > b.key;
    if (a.depth != b.depth) return a.depth < b.depth;
    if (a.lp.objective != b.lp.objective) return a.lp.objective > b.lp.objective;
    return a.seq > b.seq;
  }
};

void validate(const MilpProblem& p) {
  const std::size_t n = p.num_vars();
  if (p.objective.size() != n)
    throw MalformedProblemError("objective has " + std::to_string(p.objective.size()) + " coefficients for " +
                                std::to_string(n) + " variables");
  if (p.int_bounds.size() != p.num_int_vars) throw MalformedProblemError("int_bounds size mismatch");
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    if (c.coefficients.size() != n)
      throw MalformedProblemError("constraint " + std::to_string(i) + " has the wrong coefficient count");
    if (!std::isfinite(c.rhs)) throw MalformedProblemError("constraint " + std::to_string(i) + " has a non-finite rhs");
    if (c.relation == Relation::Range && !(c.range >= 0.0 && std::isfinite(c.range)))
      throw MalformedProblemError("constraint " + std::to_string(i) + " has an invalid range");
    for (double v : c.coefficients)
      if (!std::isfinite(v)) throw MalformedProblemError("non-finite coefficient");
  }
  for (double v : p.objective)
    if (!std::isfinite(v)) throw MalformedProblemError("non-finite objective coefficient");
  for (std::size_t j = 0; j < p.num_int_vars; ++j) {
    const auto& b = p.int_bounds[j];
    if (!b.upper && !b.cap) throw MalformedProblemError("integer variable " + std::to_string(j) + " has no cap");
    const auto hi = std::min(b.upper.value_or(b.cap.value_or(0)), b.cap.value_or(b.upper.value_or(0)));
    if (hi < b.lower) throw MalformedProblemError("integer variable " + std::to_string(j) + " has empty bounds");
  }
}

double tolerance(double bound) { return kPrimalTol * std::max(1.0, std::abs(bound)); }

}  // namespace

/// Bounded dual simplex on  A x - s = 0  with the constraints turned into bounds on the logicals s.
///
/// Every structural is boxed, so the all-logical basis is dual feasible for any cost vector, and a
/// basis that was optimal once stays dual feasible when only bounds change. Branch-and-bound nodes
/// and new right-hand sides therefore restart from the previous basis.
struct Solver::Impl {
  SolverOptions options;
  std::size_t n = 0, m = 0, total = 0;
  double sign = 1.0;
  bool integral_objective = false;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> cols;  // sparse structural columns
  std::vector<Relation> relation;
  std::vector<double> range;
  std::vector<double> base_rhs;
  std::vector<double> cost;  // minimization form, zero on logicals
  std::vector<double> base_lower, base_upper, cap_at;

  std::vector<double> lower, upper, x, d, alpha_row, column, delta;
  std::vector<std::pair<double, std::size_t>> candidates;
  std::vector<std::size_t> head;       // basic variable of each row
  std::vector<std::ptrdiff_t> where;   // row of a basic variable, -1 if nonbasic
  std::vector<std::uint8_t> at_upper;  // side of a nonbasic variable
  std::vector<double> binv;            // row-major m x m
  std::size_t since_refactor = 0;
  std::size_t pivots = 0;

  Impl(const MilpProblem& problem, SolverOptions opts) : options(opts) {
    validate(problem);
    n = problem.num_vars();
    m = problem.constraints.size();
    total = n + m;
    sign = problem.sense == Sense::Minimize ? 1.0 : -1.0;

    cols.resize(n);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& c = problem.constraints[i];
      for (std::size_t j = 0; j < n; ++j)
        if (c.coefficients[j] != 0.0) cols[j].emplace_back(static_cast<std::uint32_t>(i), c.coefficients[j]);
      relation.push_back(c.relation);
      range.push_back(c.range);
      base_rhs.push_back(c.rhs);
    }
    cost.assign(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = sign * problem.objective[j];
    integral_objective = std::all_of(problem.objective.begin(), problem.objective.end(),
                                     [](double c) { return c == std::round(c); });

    base_lower.assign(n, 0.0);
    base_upper.assign(n, 1.0);
    cap_at.assign(n, kInf);
    for (std::size_t j = 0; j < problem.num_int_vars; ++j) {
      const auto& b = problem.int_bounds[j];
      base_lower[j] = static_cast<double>(b.lower);
      double hi = b.upper ? static_cast<double>(*b.upper) : kInf;
      if (b.cap && static_cast<double>(*b.cap) < hi) {
        hi = static_cast<double>(*b.cap);
        cap_at[j] = hi;
      }
      base_upper[j] = hi;
    }


    lower.assign(total, 0.0);
    upper.assign(total, 0.0);
    x.assign(total, 0.0);
    d.assign(total, 0.0);
    alpha_row.assign(total, 0.0);
    column.assign(m, 0.0);
    delta.assign(m, 0.0);
    head.assign(m, 0);
    where.assign(total, -1);
    at_upper.assign(total, 0);
    binv.assign(m * m, 0.0);
    cold_start();
  }

  double* binv_row(std::size_t i) { return &binv[i * m]; }

  std::shared_ptr<const Basis> snapshot() const {
    return std::make_shared<const Basis>(Basis{head, at_upper, d, binv, since_refactor});
  }

  void restore(const Basis& b) {
    head = b.head;
    at_upper = b.at_upper;
    d = b.d;
    binv = b.binv;
    since_refactor = b.since_refactor;
    std::fill(where.begin(), where.end(), -1);
    for (std::size_t i = 0; i < m; ++i) where[head[i]] = static_cast<std::ptrdiff_t>(i);
  }

  void cold_start() {
    std::fill(binv.begin(), binv.end(), 0.0);
    std::fill(where.begin(), where.end(), -1);
    for (std::size_t i = 0; i < m; ++i) {
      head[i] = n + i;
      where[n + i] = static_cast<std::ptrdiff_t>(i);
      binv[i * m + i] = -1.0;
    }
    for (std::size_t j = 0; j < total; ++j) d[j] = cost[j];
    for (std::size_t j = 0; j < n; ++j) at_upper[j] = d[j] < 0.0;
    since_refactor = 0;
  }

  double row_dot(const double* rho, std::size_t j) const {
    if (j >= n) return -rho[j - n];
    double v = 0.0;
    for (const auto& [i, a] : cols[j]) v += rho[i] * a;
    return v;
  }

  /// Rebuilds B^-1 and the reduced costs. Basic logicals are unit columns, so only the block of
  /// basic structurals on the rows of nonbasic logicals needs inverting. A numerically singular
  /// basis falls back to the all-logical one.
  void refactor() {
    std::vector<std::size_t> structural, rows;
    std::vector<std::ptrdiff_t> row_slot(m, -1);
    for (std::size_t k = 0; k < m; ++k)
      if (head[k] < n) structural.push_back(k);
    for (std::size_t i = 0; i < m; ++i)
      if (where[n + i] < 0) {
        row_slot[i] = static_cast<std::ptrdiff_t>(rows.size());
        rows.push_back(i);
      }
    const std::size_t k = structural.size();
    if (rows.size() != k) {
      cold_start();
      return;
    }

    // Gauss-Jordan on [K | I] with K(r, s) = A(rows[r], head[structural[s]]).
    std::vector<double> kb(k * k, 0.0), inv(k * k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      for (const auto& [i, a] : cols[head[structural[c]]])
        if (row_slot[i] >= 0) kb[static_cast<std::size_t>(row_slot[i]) * k + c] = a;
      inv[c * k + c] = 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < k; ++r)
        if (std::abs(kb[r * k + c]) > std::abs(kb[piv * k + c])) piv = r;
      if (std::abs(kb[piv * k + c]) < 1e-11) {
        cold_start();
        return;
      }
      if (piv != c)
        for (std::size_t j = 0; j < k; ++j) {
          std::swap(kb[piv * k + j], kb[c * k + j]);
          std::swap(inv[piv * k + j], inv[c * k + j]);
        }
      const double p = 1.0 / kb[c * k + c];
      for (std::size_t j = 0; j < k; ++j) {
        kb[c * k + j] *= p;
        inv[c * k + j] *= p;
      }
      for (std::size_t r = 0; r < k; ++r) {
        const double f = kb[r * k + c];
        if (r == c || f == 0.0) continue;
        for (std::size_t j = c; j < k; ++j) kb[r * k + j] -= f * kb[c * k + j];
        for (std::size_t j = 0; j < k; ++j) inv[r * k + j] -= f * inv[c * k + j];
      }
    }

    // Row s of K^-1 belongs to structural s; a basic logical of row i gets A(i, S) K^-1 and -1.
    std::fill(binv.begin(), binv.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      double* out = binv_row(structural[c]);
      const double* src = &inv[c * k];
      for (std::size_t r = 0; r < k; ++r) out[rows[r]] = src[r];
      for (const auto& [i, a] : cols[head[structural[c]]]) {
        if (row_slot[i] >= 0) continue;
        double* lrow = binv_row(static_cast<std::size_t>(where[n + i]));
        for (std::size_t r = 0; r < k; ++r) lrow[rows[r]] += a * src[r];
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      if (where[n + i] >= 0) binv_row(static_cast<std::size_t>(where[n + i]))[i] = -1.0;

    std::vector<double> y(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[head[i]];
      if (cb == 0.0) continue;
      const double* row = binv_row(i);
      for (std::size_t k = 0; k < m; ++k) y[k] += cb * row[k];
    }
    for (std::size_t j = 0; j < total; ++j) d[j] = where[j] >= 0 ? 0.0 : cost[j] - row_dot(y.data(), j);
    since_refactor = 0;
  }

  /// Moves nonbasic variables to the bound their reduced cost asks for. False when a one-sided
  /// variable has the wrong sign, i.e. the basis is not dual feasible.
  bool place_nonbasics() {
    for (std::size_t j = 0; j < total; ++j) {
      if (where[j] >= 0) continue;
      const bool lo = lower[j] > -kInf, hi = upper[j] < kInf;
      if (lo && hi) {
        at_upper[j] = d[j] < -kDualTol;
      } else if (lo) {
        if (d[j] < -kDualTol) return false;
        at_upper[j] = 0;
      } else if (hi) {
        if (d[j] > kDualTol) return false;
        at_upper[j] = 1;
      } else {
        return false;
      }
      x[j] = at_upper[j] ? upper[j] : lower[j];
    }
    return true;
  }

  void place_or_restart() {
    if (!place_nonbasics()) {
      cold_start();
      place_nonbasics();
    }
  }

  /// x_B = -B^-1 (sum of nonbasic columns times their values).
  void compute_primal() {
    std::vector<double> v(m, 0.0);
    for (std::size_t j = 0; j < total; ++j) {
      if (where[j] >= 0 || x[j] == 0.0) continue;
      if (j >= n) {
        v[j - n] -= x[j];
      } else {
        for (const auto& [i, a] : cols[j]) v[i] += a * x[j];
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = binv_row(i);
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += row[k] * v[k];
      x[head[i]] = -s;
    }
  }

  bool eligible(std::size_t j, double a, bool to_lower) const {
    if (at_upper[j]) return to_lower ? a > kPivotTol : a < -kPivotTol;
    return to_lower ? a < -kPivotTol : a > kPivotTol;
  }

  LpStatus dual_simplex() {
    const std::size_t limit = 20 * total + 1000;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      if (since_refactor >= kRefactorEvery) {
        refactor();
        place_or_restart();
        compute_primal();
      }

      std::size_t r = m;
      double worst = 0.0;
      bool to_lower = false;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t b = head[i];
        const double below = lower[b] - x[b], above = x[b] - upper[b];
        if (below > tolerance(lower[b]) && below > worst) {
          worst = below;
          r = i;
          to_lower = true;
        } else if (above > tolerance(upper[b]) && above > worst) {
          worst = above;
          r = i;
          to_lower = false;
        }
      }
      if (r == m) return LpStatus::Optimal;

      // Bound-flipping ratio test: boxed candidates are passed by moving them to their other
      // bound while the dual objective still improves; the entering variable is then picked
      // Harris-style among the remaining breakpoints.
      const double* rho = binv_row(r);
      candidates.clear();
      for (std::size_t j = 0; j < total; ++j) {
        alpha_row[j] = 0.0;
        if (where[j] >= 0) continue;
        const double a = row_dot(rho, j);
        alpha_row[j] = a;
        // Fixed variables never enter but their reduced costs must stay current.
        if (lower[j] == upper[j] || !eligible(j, a, to_lower)) continue;
        const double slack = at_upper[j] ? std::max(-d[j], 0.0) : std::max(d[j], 0.0);
        candidates.push_back({slack / std::abs(a), j});
      }
      std::sort(candidates.begin(), candidates.end());
      double slope = worst;
      std::size_t first = 0;
      for (; first < candidates.size(); ++first) {
        const std::size_t j = candidates[first].second;
        const double pass = (upper[j] - lower[j]) * std::abs(alpha_row[j]);
        if (!(slope - pass > kPrimalTol)) break;
        slope -= pass;
      }
      if (first == candidates.size()) return LpStatus::Infeasible;
      double bound = kInf;
      for (std::size_t k = first; k < candidates.size(); ++k) {
        const std::size_t j = candidates[k].second;
        const double slack = at_upper[j] ? std::max(-d[j], 0.0) : std::max(d[j], 0.0);
        bound = std::min(bound, (slack + kDualTol) / std::abs(alpha_row[j]));
      }
      std::size_t q = total;
      double best = 0.0;
      for (std::size_t k = first; k < candidates.size() && candidates[k].first <= bound; ++k) {
        const std::size_t j = candidates[k].second;
        if (std::abs(alpha_row[j]) > best) {
          best = std::abs(alpha_row[j]);
          q = j;
        }
      }
      if (q == total) return LpStatus::Infeasible;

      if (first > 0) {
        std::fill(delta.begin(), delta.end(), 0.0);
        for (std::size_t k = 0; k < first; ++k) {
          const std::size_t j = candidates[k].second;
          const double dx = at_upper[j] ? lower[j] - upper[j] : upper[j] - lower[j];
          at_upper[j] = !at_upper[j];
          x[j] += dx;
          if (j >= n) {
            delta[j - n] -= dx;
          } else {
            for (const auto& [i, a] : cols[j]) delta[i] += a * dx;
          }
        }
        for (std::size_t i = 0; i < m; ++i) {
          const double* row = binv_row(i);
          double v = 0.0;
          for (std::size_t k = 0; k < m; ++k) v += row[k] * delta[k];
          x[head[i]] -= v;
        }
      }

      for (std::size_t i = 0; i < m; ++i) {
        const double* row = binv_row(i);
        if (q >= n) {
          column[i] = -row[q - n];
        } else {
          double s = 0.0;
          for (const auto& [k, a] : cols[q]) s += row[k] * a;
          column[i] = s;
        }
      }
      const double pivot = column[r];
      if (std::abs(pivot) < kPivotTol || std::abs(pivot - alpha_row[q]) > 1e-7 * std::max(1.0, std::abs(pivot))) {
        // Row and column disagree: the inverse drifted.
        if (since_refactor == 0) return LpStatus::IterationLimit;
        since_refactor = kRefactorEvery;
        continue;
      }

      const std::size_t leaving = head[r];
      const double target = to_lower ? lower[leaving] : upper[leaving];
      const double step = (x[leaving] - target) / pivot;
      for (std::size_t i = 0; i < m; ++i)
        if (column[i] != 0.0) x[head[i]] -= column[i] * step;
      x[q] += step;
      x[leaving] = target;

      const double theta = d[q] / pivot;
      if (theta != 0.0)
        for (std::size_t j = 0; j < total; ++j)
          if (alpha_row[j] != 0.0) d[j] -= theta * alpha_row[j];
      d[q] = 0.0;
      d[leaving] = -theta;

      head[r] = q;
      where[q] = static_cast<std::ptrdiff_t>(r);
      where[leaving] = -1;
      at_upper[leaving] = !to_lower;

      double* pr = binv_row(r);
      const double inv = 1.0 / pivot;
      for (std::size_t k = 0; k < m; ++k) pr[k] *= inv;
      for (std::size_t i = 0; i < m; ++i) {
        const double f = column[i];
        if (i == r || f == 0.0) continue;
        double* row = binv_row(i);
        for (std::size_t k = 0; k < m; ++k) row[k] -= f * pr[k];
      }
      ++since_refactor;
      ++pivots;
    }
    return LpStatus::IterationLimit;
  }

  /// Largest relative violation of A x = s or of a bound by the current point.
  double residual() const {
    std::vector<double> act(m, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& [i, a] : cols[j]) act[i] += a * x[j];
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      worst = std::max(worst, std::abs(act[i] - x[n + i]) / std::max(1.0, std::abs(act[i])));
    for (std::size_t j = 0; j < total; ++j)
      worst = std::max({worst, (lower[j] - x[j]) / std::max(1.0, std::abs(lower[j])),
                        (x[j] - upper[j]) / std::max(1.0, std::abs(upper[j]))});
    return worst;
  }

  LpStatus status_of_failure = LpStatus::Infeasible;

  /// Runs the dual simplex from the current basis, refactoring or restarting on trouble.
  LpStatus optimize() {
    for (int attempt = 0;; ++attempt) {
      const auto status = dual_simplex();
      if (status == LpStatus::Optimal && residual() <= 1e-7) return status;
      if (status == LpStatus::Infeasible && (since_refactor == 0 || attempt > 0)) {
        status_of_failure = LpStatus::Infeasible;
        return status;
      }
      if (attempt == 2) {
        status_of_failure = LpStatus::IterationLimit;
        return LpStatus::IterationLimit;
      }
      // Retry on a fresh factorization, or from scratch after a stall.
      if (status == LpStatus::IterationLimit)
        cold_start();
      else
        refactor();
      place_or_restart();
      compute_primal();
    }
  }

  LpResult solve_lp(const std::vector<double>& lo, const std::vector<double>& hi) {
    LpResult out;
    for (std::size_t j = 0; j < n; ++j)
      if (lo[j] > hi[j] + kPrimalTol) return out;
    std::copy(lo.begin(), lo.end(), lower.begin());
    std::copy(hi.begin(), hi.end(), upper.begin());
    place_or_restart();
    compute_primal();

    if (optimize() != LpStatus::Optimal) {
      out.status = status_of_failure;
      return out;
    }
    // Zero-cost directions can leave variables on their caps; move them off where possible so
    // that a cap hit signals a truncated optimum rather than an arbitrary vertex.
    for (int round = 0; round < 4; ++round) {
      bool moved = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (where[j] >= 0 || !at_upper[j] || upper[j] != cap_at[j] || lower[j] == upper[j]) continue;
        if (std::abs(d[j]) > kDualTol) continue;
        at_upper[j] = 0;
        x[j] = lower[j];
        moved = true;
      }
      if (!moved) break;
      compute_primal();
      if (optimize() != LpStatus::Optimal) {
        out.status = LpStatus::IterationLimit;
        return out;
      }
    }
    out.status = LpStatus::Optimal;
    out.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t j = 0; j < n; ++j) {
      out.x[j] = std::clamp(out.x[j], lower[j], upper[j]);
      out.objective += cost[j] * out.x[j];
    }
    return out;
  }

  void set_rhs(std::span<const double> rhs) {
    if (rhs.size() != m)
      throw MalformedProblemError("expected " + std::to_string(m) + " right-hand sides, got " +
                                  std::to_string(rhs.size()));
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(rhs[i])) throw MalformedProblemError("non-finite right-hand side");
      const std::size_t s = n + i;
      switch (relation[i]) {
        case Relation::LessEqual:
          lower[s] = -kInf, upper[s] = rhs[i];
          break;
        case Relation::Equal:
          lower[s] = upper[s] = rhs[i];
          break;
        case Relation::GreaterEqual:
          lower[s] = rhs[i], upper[s] = kInf;
          break;
        case Relation::Range:
          lower[s] = rhs[i] - range[i], upper[s] = rhs[i];
          break;
      }
    }
  }

  bool satisfies(const std::vector<std::int64_t>& values) const {
    std::vector<double> act(m, 0.0), scale(m, 1.0);
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& [i, a] : cols[j]) {
        const double v = a * static_cast<double>(values[j]);
        act[i] += v;
        scale[i] = std::max(scale[i], std::abs(v));
      }
    for (std::size_t i = 0; i < m; ++i) {
      const double lo = lower[n + i], hi = upper[n + i];
      const double tol = 1e-9 * std::max({scale[i], lo > -kInf ? std::abs(lo) : 0.0, hi < kInf ? std::abs(hi) : 0.0});
      if (act[i] < lo - tol || act[i] > hi + tol) return false;
    }
    return true;
  }

  bool hits_cap(const auto& values) const {
    for (std::size_t j = 0; j < n; ++j)
      if (cap_at[j] < kInf && static_cast<double>(values[j]) >= cap_at[j] - kIntTol) return true;
    return false;
  }

  MilpSolution run(std::span<const double> rhs) {
    set_rhs(rhs);
    MilpSolution out;
    const auto record = [&](const std::vector<double>& lo, const std::vector<double>& hi, const LpResult& r) {
      if (options.record_nodes) out.node_log.push_back({lo, hi, r.status == LpStatus::Optimal, sign * r.objective});
    };

    LpResult root = solve_lp(base_lower, base_upper);
    record(base_lower, base_upper, root);
    out.nodes = 1;
    if (root.status == LpStatus::IterationLimit) {
      // No bound is known; report the trivial one.
      out.status = MilpStatus::NodeLimit;
      out.root_bound = out.best_bound = sign * -kInf;
      return out;
    }
    if (root.status == LpStatus::Infeasible) return out;
    out.root_bound = sign * root.objective;
    out.relaxed_values = root.x;
    if (options.relax_integrality) {
      out.objective_value = out.best_bound = sign * root.objective;
      out.status = hits_cap(root.x) ? MilpStatus::CapReached : MilpStatus::Optimal;
      return out;
    }

    // The next right-hand side starts from this basis, not from wherever the tree ended.
    const auto root_basis = snapshot();
    struct RestoreRoot {
      Impl& self;
      const Basis& basis;
      ~RestoreRoot() { self.restore(basis); }
    } restore_root{*this, *root_basis};
    const std::size_t snapshot_bytes = (m * m + total) * sizeof(double) + total * (sizeof(std::size_t) + 1);
    std::size_t snapshots_left = std::max<std::size_t>(kSnapshotBudget / std::max<std::size_t>(snapshot_bytes, 1), 1);

    const auto prunable = [&](double bound, double incumbent) {
      if (incumbent == kInf) return false;
      if (integral_objective) return std::ceil(bound - kIntTol) >= incumbent - 0.5;
      return bound >= incumbent - kPrimalTol * std::max(1.0, std::abs(incumbent));
    };

    double incumbent = kInf;
    std::vector<std::int64_t> incumbent_x;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::size_t seq = 0;
    const auto key_of = [&](double bound) { return integral_objective ? std::ceil(bound - kIntTol) : bound; };
    const double root_key = key_of(root.objective);
    open.push(Node{base_lower, base_upper, std::move(root), 0, seq++, root_key, root_basis});

    const auto stop = [&](double bound) {
      out.status = MilpStatus::NodeLimit;
      out.best_bound = sign * std::min(bound, incumbent);
      if (incumbent < kInf) {
        out.values = incumbent_x;
        out.objective_value = sign * incumbent;
      }
      return out;
    };

    while (!open.empty()) {
      if (out.nodes >= options.max_nodes) return stop(open.top().key);
      Node node = open.top();
      open.pop();
      if (prunable(node.lp.objective, incumbent)) continue;

      // Most fractional variable; ties go to the lowest index.
      std::size_t branch = n;
      double best_frac = kIntTol;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = node.lp.x[j];
        const double frac = std::abs(v - std::round(v));
        if (frac > best_frac + 1e-12) {
          best_frac = frac;
          branch = j;
        }
      }

      if (branch == n) {
        std::vector<std::int64_t> rounded(n);
        for (std::size_t j = 0; j < n; ++j) rounded[j] = static_cast<std::int64_t>(std::llround(node.lp.x[j]));
        if (!satisfies(rounded)) continue;
        double value = 0.0;
        for (std::size_t j = 0; j < n; ++j) value += cost[j] * static_cast<double>(rounded[j]);
        if (value < incumbent) {
          incumbent = value;
          incumbent_x = std::move(rounded);
        }
        continue;
      }

      const double v = node.lp.x[branch];
      for (int side = 0; side < 2; ++side) {
        Node child{node.lower, node.upper, {}, node.depth + 1, seq++, 0.0, nullptr};
        if (side == 0)
          child.upper[branch] = std::floor(v);
        else
          child.lower[branch] = std::ceil(v);
        if (node.basis) restore(*node.basis);
        child.lp = solve_lp(child.lower, child.upper);
        child.key = key_of(child.lp.objective);
        ++out.nodes;
        record(child.lower, child.upper, child.lp);
        if (child.lp.status == LpStatus::IterationLimit) {
          double bound = node.key;
          if (!open.empty()) bound = std::min(bound, open.top().key);
          return stop(bound);
        }
        if (child.lp.status != LpStatus::Optimal || prunable(child.lp.objective, incumbent)) continue;
        if (snapshots_left > 0) {
          --snapshots_left;
          child.basis = snapshot();
        }
        open.push(std::move(child));
      }
    }

    if (incumbent == kInf) return out;
    out.values = std::move(incumbent_x);
    out.objective_value = out.best_bound = sign * incumbent;
    out.status = hits_cap(out.values) ? MilpStatus::CapReached : MilpStatus::Optimal;
    return out;
  }
};

Solver::Solver(const MilpProblem& problem, SolverOptions options)
    : impl_(std::make_unique<Impl>(problem, options)) {}
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;
Solver::~Solver() = default;

MilpSolution Solver::solve() { return impl_->run(impl_->base_rhs); }
MilpSolution Solver::solve(std::span<const double> rhs) { return impl_->run(rhs); }
std::size_t Solver::pivots() const noexcept { return impl_->pivots; }

MilpSolution solve(const MilpProblem& problem, const SolverOptions& options) {
  Solver solver(problem, options);
  return solver.solve();
}

}  // namespace stochalign::milp
