#include "stochalign/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <list>
#include <stdexcept>

namespace stochalign {

namespace {

constexpr double kLogTolerance = 1e-12;
constexpr double kTieWindow = 1e-9;

using SparseVector = std::vector<std::pair<std::int32_t, std::int64_t>>;

SparseVector sparsify(const std::vector<std::int64_t>& dense) {
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0) out.emplace_back(static_cast<std::int32_t>(i), dense[i]);
  return out;
}

/// Solution vector minus one firing of t, if t occurs in it.
std::optional<SparseVector> without_one(const SparseVector& x, TransitionId t) {
  auto it = std::lower_bound(x.begin(), x.end(), t, [](const auto& e, TransitionId v) { return e.first < v; });
  if (it == x.end() || it->first != t || it->second < 1) return std::nullopt;
  SparseVector out = x;
  auto& entry = out[static_cast<std::size_t>(it - x.begin())];
  if (--entry.second == 0) out.erase(out.begin() + (it - x.begin()));
  return out;
}

}  // namespace

/// Heuristic values of one marking. The solution vectors allow derivation for children.
struct AlignmentSearch::HeuristicEntry {
  std::optional<double> distance;
  std::optional<double> log10_probability;
  std::optional<SparseVector> distance_solution;
  std::optional<SparseVector> probability_solution;
};

/// Bounded LRU map from marking id to heuristic values.
struct AlignmentSearch::Cache {
  explicit Cache(std::size_t capacity) : capacity(std::max<std::size_t>(capacity, 1)) {}

  HeuristicEntry* find(std::uint32_t key) {
    auto it = index.find(key);
    if (it == index.end()) return nullptr;
    order.splice(order.begin(), order, it->second);
    return &it->second->second;
  }

  HeuristicEntry& upsert(std::uint32_t key) {
    if (auto* e = find(key)) return *e;
    order.emplace_front(key, HeuristicEntry{});
    index[key] = order.begin();
    if (index.size() > capacity) {
      index.erase(order.back().first);
      order.pop_back();
    }
    return order.front().second;
  }

  std::size_t capacity;
  std::list<std::pair<std::uint32_t, HeuristicEntry>> order;
  std::unordered_map<std::uint32_t, std::list<std::pair<std::uint32_t, HeuristicEntry>>::iterator> index;
};

bool AlignmentSearch::OpenOrder::operator()(const OpenEntry& a, const OpenEntry& b) const {
  // std::push_heap builds a max-heap; "less" means lower priority.
  if (a.f != b.f) return a.f > b.f;
  if (a.g_distance != b.g_distance) return a.g_distance < b.g_distance;
  return a.seq > b.seq;
}

AlignmentSearch::AlignmentSearch(const SyncProduct& sp, SearchConfig config)
    : sp_(sp),
      config_(std::move(config)),
      params_(config_.alpha),
      heuristics_(sp, config_.heuristic),
      evaluator_(heuristics_),
      cache_(std::make_unique<Cache>(config_.cache_size)) {}

AlignmentSearch::~AlignmentSearch() = default;

const Marking& AlignmentSearch::marking_of(std::size_t index) const { return markings_.at(nodes_.at(index).marking); }

std::uint32_t AlignmentSearch::intern(Marking m) {
  auto it = marking_ids_.find(m);
  if (it != marking_ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(markings_.size());
  markings_.push_back(m);
  marking_ids_.emplace(std::move(m), id);
  return id;
}

double AlignmentSearch::score(const Node& n) const {
  return f_score(n.g_distance, n.h_distance, n.log10_g_probability, n.log10_h_probability, params_);
}

void AlignmentSearch::ensure_heuristics(Node& node) {
  if (node.distance_exact && node.probability_exact) return;
  auto& entry = cache_->upsert(node.marking);
  const Marking& m = markings_[node.marking];
  if (!entry.distance) {
    const auto r = evaluator_.edit_distance(m);
    ++stats_.milp_solves;
    entry.distance = r.value;
    if (!r.parikh.empty()) entry.distance_solution = sparsify(r.parikh);
  }
  if (!entry.log10_probability) {
    const auto r = evaluator_.probability_gain(m);
    ++stats_.milp_solves;
    entry.log10_probability = r.value;
    if (!r.parikh.empty()) entry.probability_solution = sparsify(r.parikh);
  }
  // Bounds and fallbacks can be weaker than the estimate inherited from the parent; both are admissible.
  node.h_distance = std::max(node.h_distance, *entry.distance);
  node.log10_h_probability = std::min(node.log10_h_probability, *entry.log10_probability);
  node.distance_exact = node.probability_exact = true;
  node.f = score(node);
}

void AlignmentSearch::derive_heuristics(const Node& parent, Node& child, TransitionId t, double gain) {
  // h(M) <= c(t) + h*(M') and h_p(M) >= p(M,t) * h_p*(M') keep these estimates admissible.
  child.h_distance = std::max(0.0, parent.h_distance - sp_.cost(t));
  child.log10_h_probability = std::min(0.0, parent.log10_h_probability - std::log10(gain));
  child.distance_exact = child.probability_exact = false;

  if (auto* cached = cache_->find(child.marking); cached && cached->distance && cached->log10_probability) {
    child.h_distance = std::max(child.h_distance, *cached->distance);
    child.log10_h_probability = std::min(child.log10_h_probability, *cached->log10_probability);
    child.distance_exact = child.probability_exact = true;
    return;
  }

  const auto* parent_entry = cache_->find(parent.marking);
  if (parent_entry == nullptr) return;
  std::optional<SparseVector> distance_solution, probability_solution;
  if (parent_entry->distance_solution) distance_solution = without_one(*parent_entry->distance_solution, t);
  if (parent_entry->probability_solution)
    probability_solution = without_one(*parent_entry->probability_solution, t);
  if (!distance_solution && !probability_solution) return;
  const double parent_distance = parent_entry->distance.value_or(0.0);
  const double parent_probability = parent_entry->log10_probability.value_or(0.0);

  // The parent's solution minus one firing of t is optimal for the child.
  auto& entry = cache_->upsert(child.marking);
  if (distance_solution && !entry.distance) {
    entry.distance = std::max(0.0, parent_distance - sp_.cost(t));
    entry.distance_solution = std::move(distance_solution);
  }
  if (probability_solution && !entry.log10_probability) {
    entry.log10_probability =
        std::min(0.0, parent_probability - heuristics_.log_gain_bounds()[static_cast<std::size_t>(t)]);
    entry.probability_solution = std::move(probability_solution);
  }
  if (entry.distance) {
    child.h_distance = std::max(child.h_distance, *entry.distance);
    child.distance_exact = true;
  }
  if (entry.log10_probability) {
    child.log10_h_probability = std::min(child.log10_h_probability, *entry.log10_probability);
    child.probability_exact = true;
  }
}

bool AlignmentSearch::dominated(const Node& candidate) const {
  auto it = frontier_.find(candidate.marking);
  if (it == frontier_.end()) return false;
  const double alpha = config_.alpha;
  for (auto idx : it->second) {
    const auto& other = nodes_[idx];
    const bool distance_ok = alpha == 0.0 || other.g_distance <= candidate.g_distance;
    const bool probability_ok =
        alpha == 1.0 || other.log10_g_probability >= candidate.log10_g_probability - kLogTolerance;
    if (distance_ok && probability_ok) return true;
  }
  return false;
}

void AlignmentSearch::store(std::size_t index) {
  auto& bucket = frontier_[nodes_[index].marking];
  const auto& fresh = nodes_[index];
  const double alpha = config_.alpha;
  std::erase_if(bucket, [&](std::size_t idx) {
    auto& other = nodes_[idx];
    const bool distance_ok = alpha == 0.0 || fresh.g_distance <= other.g_distance;
    const bool probability_ok =
        alpha == 1.0 || fresh.log10_g_probability >= other.log10_g_probability - kLogTolerance;
    if (distance_ok && probability_ok) {
      other.superseded = true;
      return true;
    }
    return false;
  });
  bucket.push_back(index);
}

void AlignmentSearch::push(std::size_t index) {
  const auto& n = nodes_[index];
  open_.push_back({n.f, n.g_distance, n.seq, index});
  std::push_heap(open_.begin(), open_.end(), OpenOrder{});
}

std::size_t AlignmentSearch::initial_node() {
  if (root_) return *root_;
  Node root;
  root.marking = intern(sp_.net().initial_marking());
  root.seq = seq_++;
  nodes_.push_back(root);
  root_ = 0;
  ensure_heuristics(nodes_[0]);
  store(0);
  return 0;
}

std::vector<TransitionId> AlignmentSearch::moves_to(std::size_t index) const {
  std::vector<TransitionId> moves;
  for (auto i = static_cast<std::int64_t>(index); nodes_[static_cast<std::size_t>(i)].parent >= 0;
       i = nodes_[static_cast<std::size_t>(i)].parent)
    moves.push_back(nodes_[static_cast<std::size_t>(i)].move);
  std::reverse(moves.begin(), moves.end());
  return moves;
}

std::vector<std::size_t> AlignmentSearch::expand(std::size_t index) {
  const auto& net = sp_.net();
  const Marking m = markings_[nodes_.at(index).marking];
  const auto enabled = enabled_transitions(net, m);
  if (enabled.empty()) throw std::logic_error("cannot expand a deadlock marking");
  ensure_heuristics(nodes_[index]);
  ++stats_.expanded;

  // Model moves occupy the first |T_s| product transitions and share the model's enabledness.
  const auto model_transitions = static_cast<TransitionId>(sp_.model().num_transitions());
  double enabled_weight = 0.0;
  for (auto t : enabled)
    if (t < model_transitions) enabled_weight += sp_.model().transition(t).weight_value;

  std::vector<std::size_t> children;
  for (auto t : enabled) {
    const Node& parent = nodes_[index];
    const auto model_t = sp_.to_model(t);
    const double gain = model_t ? sp_.model().transition(*model_t).weight_value / enabled_weight : 1.0;

    Node child;
    child.marking = intern(fire(net, m, t));
    child.g_distance = parent.g_distance + sp_.cost(t);
    child.log10_g_probability = parent.log10_g_probability + std::log10(gain);
    child.parent = static_cast<std::int64_t>(index);
    child.move = t;
    ++stats_.generated;
    if (dominated(child)) {
      ++stats_.pruned;
      continue;
    }
    if (config_.lazy_heuristics) {
      derive_heuristics(parent, child, t, gain);
    } else {
      child.distance_exact = child.probability_exact = false;
    }
    if (!config_.lazy_heuristics) ensure_heuristics(child);
    child.f = score(child);
    if (best_goal_ && child.f > nodes_[*best_goal_].f + kTieWindow) {
      ++stats_.pruned;
      continue;
    }
    child.seq = seq_++;
    nodes_.push_back(child);
    const std::size_t ci = nodes_.size() - 1;
    store(ci);
    if (is_deadlock(net, markings_[child.marking])) {
      // Heuristics are exactly zero here, so f is the loss of this complete alignment.
      auto& goal = nodes_[ci];
      goal.h_distance = 0.0;
      goal.log10_h_probability = 0.0;
      goal.distance_exact = goal.probability_exact = true;
      goal.f = score(goal);
      if (!best_goal_ || goal.f < nodes_[*best_goal_].f) best_goal_ = ci;
    }
    children.push_back(ci);
  }
  return children;
}

Alignment AlignmentSearch::build_alignment(std::size_t index) const {
  const auto moves = moves_to(index);
  return make_alignment(sp_, moves, config_.alpha, config_.rational);
}

SearchResult AlignmentSearch::run() {
  const auto started = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  };

  const auto root = initial_node();
  const bool root_infeasible =
      evaluator_.edit_distance(markings_[nodes_[root].marking]).status == milp::MilpStatus::Infeasible;
  push(root);
  std::vector<double> dequeued;

  // Rational mode keeps dequeuing within a small window above the first goal and picks the goal
  // whose exactly computed loss is smallest, so floating-point near-ties cannot decide the result.
  std::optional<std::size_t> chosen;
  std::optional<Alignment> chosen_alignment;
  const auto finish = [&]() {
    SearchResult result;
    result.alignment = std::move(*chosen_alignment);
    stats_.markings = markings_.size();
    stats_.runtime_ms = elapsed_ms();
    result.stats = stats_;
    if (config_.check_invariants) {
      for (double f : dequeued)
        if (f > result.alignment.loss + 1e-9)
          throw std::logic_error("dequeued score " + std::to_string(f) + " exceeds final loss " +
                                 std::to_string(result.alignment.loss));
    }
    return result;
  };

  while (!open_.empty()) {
    std::pop_heap(open_.begin(), open_.end(), OpenOrder{});
    const OpenEntry top = open_.back();
    open_.pop_back();
    Node& node = nodes_[top.node];
    if (node.superseded || top.f != node.f) continue;
    if (chosen && node.f > nodes_[*chosen].f + kTieWindow) return finish();

    if (!node.distance_exact || !node.probability_exact) {
      const double before = node.f;
      ensure_heuristics(node);
      if (node.f > before) {
        ++stats_.requeued;
        push(top.node);
        continue;
      }
    }
    if (config_.check_invariants) dequeued.push_back(node.f);

    const Marking& m = markings_[node.marking];
    if (is_deadlock(sp_.net(), m)) {
      auto candidate = build_alignment(top.node);
      if (!chosen || candidate.loss < chosen_alignment->loss) {
        chosen = top.node;
        chosen_alignment = std::move(candidate);
      }
      if (!config_.rational) return finish();
      continue;
    }

    if (stats_.expanded >= config_.node_budget) {
      if (chosen) return finish();
      stats_.markings = markings_.size();
      stats_.runtime_ms = elapsed_ms();
      if (root_infeasible) throw NoDeadlockError("no deadlock marking reachable within the node budget");
      std::optional<Alignment> incumbent;
      if (best_goal_) incumbent = build_alignment(*best_goal_);
      throw BudgetExceededError("node budget of " + std::to_string(config_.node_budget) + " expansions exceeded",
                                std::move(incumbent), stats_);
    }

    if (config_.on_expand) {
      ensure_heuristics(node);
      config_.on_expand({m, node.g_distance, node.log10_g_probability, node.h_distance, node.log10_h_probability,
                         node.f, moves_to(top.node)});
    }
    for (auto child : expand(top.node)) push(child);
  }
  if (chosen) return finish();
  throw NoDeadlockError("the search space contains no reachable deadlock marking");
}

SearchResult stochastic_alignment(const SyncProduct& sp, const SearchConfig& config) {
  AlignmentSearch search(sp, config);
  return search.run();
}

SearchResult stochastic_alignment(const StochasticNet& net, const Trace& trace, const SearchConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const SyncProduct sp(trace, net);
  auto result = stochastic_alignment(sp, config);
  result.stats.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace stochalign
