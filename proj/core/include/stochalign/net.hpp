#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochalign/multiset.hpp"
#include "stochalign/rational.hpp"

namespace stochalign {

using PlaceId = std::int32_t;
using TransitionId = std::int32_t;
using Activity = std::string;
using Trace = std::vector<Activity>;

/// Token vector over the places of one net. Dense because nets are indexed by position.
class Marking {
 public:
  Marking() = default;
  explicit Marking(std::size_t places) : tokens_(places, 0) {}
  explicit Marking(std::vector<std::int32_t> tokens);

  std::int32_t operator[](PlaceId p) const { return tokens_[static_cast<std::size_t>(p)]; }
  std::int32_t& operator[](PlaceId p) { return tokens_[static_cast<std::size_t>(p)]; }

  std::size_t size() const noexcept { return tokens_.size(); }
  std::int64_t total() const noexcept;
  bool empty() const noexcept { return total() == 0; }
  std::span<const std::int32_t> tokens() const noexcept { return tokens_; }

  Multiset<PlaceId> to_multiset() const;
  static Marking from_multiset(const Multiset<PlaceId>& tokens, std::size_t places);

  friend bool operator==(const Marking&, const Marking&) = default;
  friend auto operator<=>(const Marking&, const Marking&) = default;

 private:
  std::vector<std::int32_t> tokens_;
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept;
};

/// Weighted arc endpoint; multiplicity >= 1.
struct Arc {
  PlaceId place;
  std::int32_t multiplicity;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct Transition {
  std::string name;
  std::optional<Activity> label;  ///< nullopt for silent (tau) transitions
  Rational weight{1};
  double weight_value = 1.0;
  std::vector<Arc> inputs;   ///< preset, sorted by place, one entry per place
  std::vector<Arc> outputs;  ///< post-set, sorted by place, one entry per place

  bool silent() const noexcept { return !label.has_value(); }
};

/// Stochastic labeled Petri net. Immutable once constructed; the constructor validates
/// weights, arc endpoints, and the initial marking.
class StochasticNet {
 public:
  StochasticNet() = default;
  StochasticNet(std::vector<std::string> place_names, std::vector<Transition> transitions,
                Marking initial_marking);

  std::size_t num_places() const noexcept { return place_names_.size(); }
  std::size_t num_transitions() const noexcept { return transitions_.size(); }

  const Transition& transition(TransitionId t) const { return transitions_.at(static_cast<std::size_t>(t)); }
  std::span<const Transition> transitions() const noexcept { return transitions_; }
  const std::string& place_name(PlaceId p) const { return place_names_.at(static_cast<std::size_t>(p)); }
  std::span<const std::string> place_names() const noexcept { return place_names_; }
  const Marking& initial_marking() const noexcept { return initial_; }

  /// F(p,t): multiplicity of the arc from place p into transition t (0 if absent).
  std::int32_t input_weight(PlaceId p, TransitionId t) const;
  /// F(t,p): multiplicity of the arc from transition t into place p (0 if absent).
  std::int32_t output_weight(PlaceId p, TransitionId t) const;

  /// True when every weight is a whole number.
  bool integer_weights() const;

 private:
  std::vector<std::string> place_names_;
  std::vector<Transition> transitions_;
  Marking initial_;
};

/// Incremental construction of a StochasticNet by name.
class NetBuilder {
 public:
  PlaceId add_place(std::string name, std::int32_t tokens = 0);
  /// Repeated places in `inputs`/`outputs` add to the arc multiplicity.
  TransitionId add_transition(std::string name, std::optional<Activity> label, Rational weight,
                              const std::vector<PlaceId>& inputs, const std::vector<PlaceId>& outputs);
  StochasticNet build() const;

 private:
  std::vector<std::string> places_;
  std::vector<std::int32_t> tokens_;
  std::vector<Transition> transitions_;
};

bool is_enabled(const StochasticNet& net, const Marking& m, TransitionId t);
std::vector<TransitionId> enabled_transitions(const StochasticNet& net, const Marking& m);
bool is_deadlock(const StochasticNet& net, const Marking& m);

/// (m - preset(t)) + postset(t). Throws NotEnabledError if t is not enabled at m.
Marking fire(const StochasticNet& net, const Marking& m, TransitionId t);

/// w(t) / sum of weights of the transitions enabled at m. Throws NotEnabledError.
double transition_probability(const StochasticNet& net, const Marking& m, TransitionId t);
Rational transition_probability_exact(const StochasticNet& net, const Marking& m, TransitionId t);

/// A firing sequence from the initial marking to a deadlock, with the visited markings.
struct ModelPath {
  std::vector<TransitionId> transitions;
  std::vector<Marking> markings;  ///< size transitions.size() + 1
};

/// Replays `transitions` from the initial marking. Throws InvalidPathError when a step is not
/// enabled or the final marking is not a deadlock.
ModelPath replay_path(const StochasticNet& net, std::span<const TransitionId> transitions);

struct PathProbability {
  double value = 1.0;
  double log10 = 0.0;
};

/// Checks the path against the net (throws InvalidPathError) and multiplies step probabilities.
PathProbability path_probability(const StochasticNet& net, const ModelPath& path);
Rational path_probability_exact(const StochasticNet& net, const ModelPath& path);

/// Labels of the non-silent transitions of a sequence.
Trace label_projection(const StochasticNet& net, std::span<const TransitionId> transitions);

/// Chain-shaped net with |trace|+1 places and one unit-weight transition per activity.
StochasticNet build_trace_net(const Trace& trace);

/// Dense |P| x |T| integer matrices (row-major by place).
struct Matrices {
  std::size_t places = 0;
  std::size_t transitions = 0;
  std::vector<std::int32_t> consumption;
  std::vector<std::int32_t> incidence;

  std::int32_t consumption_at(PlaceId p, TransitionId t) const {
    return consumption[static_cast<std::size_t>(p) * transitions + static_cast<std::size_t>(t)];
  }
  std::int32_t incidence_at(PlaceId p, TransitionId t) const {
    return incidence[static_cast<std::size_t>(p) * transitions + static_cast<std::size_t>(t)];
  }
};

/// consumption(p,t) = -F(p,t) when (p,t) is an arc and (t,p) is not, else 0;
/// incidence(p,t) = F(t,p) - F(p,t).
Matrices matrices(const StochasticNet& net);

}  // namespace stochalign
