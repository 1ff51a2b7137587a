#include "stochalign/net.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stochalign/errors.hpp"

namespace stochalign {

Marking::Marking(std::vector<std::int32_t> tokens) : tokens_(std::move(tokens)) {
  for (auto c : tokens_)
    if (c < 0) throw std::invalid_argument("negative token count");
}

std::int64_t Marking::total() const noexcept {
  return std::accumulate(tokens_.begin(), tokens_.end(), std::int64_t{0});
}

Multiset<PlaceId> Marking::to_multiset() const {
  Multiset<PlaceId> out;
  for (std::size_t p = 0; p < tokens_.size(); ++p) out.add(static_cast<PlaceId>(p), tokens_[p]);
  return out;
}

Marking Marking::from_multiset(const Multiset<PlaceId>& tokens, std::size_t places) {
  Marking m(places);
  for (const auto& [p, c] : tokens) {
    if (p < 0 || static_cast<std::size_t>(p) >= places) throw std::out_of_range("place outside marking");
    m[p] = static_cast<std::int32_t>(c);
  }
  return m;
}

std::size_t MarkingHash::operator()(const Marking& m) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (auto c : m.tokens()) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::vector<Arc> aggregate(const std::vector<PlaceId>& places) {
  std::map<PlaceId, std::int32_t> counts;
  for (auto p : places) ++counts[p];
  std::vector<Arc> arcs;
  arcs.reserve(counts.size());
  for (const auto& [p, c] : counts) arcs.push_back({p, c});
  return arcs;
}

void normalize(std::vector<Arc>& arcs) {
  std::map<PlaceId, std::int32_t> counts;
  for (const auto& a : arcs) counts[a.place] += a.multiplicity;
  arcs.clear();
  for (const auto& [p, c] : counts) arcs.push_back({p, c});
}

std::int32_t arc_weight(const std::vector<Arc>& arcs, PlaceId p) {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), p,
                             [](const Arc& a, PlaceId place) { return a.place < place; });
  return it != arcs.end() && it->place == p ? it->multiplicity : 0;
}

void require_marking_of(const StochasticNet& net, const Marking& m) {
  if (m.size() != net.num_places()) throw std::invalid_argument("marking does not belong to this net");
}

}  // namespace

StochasticNet::StochasticNet(std::vector<std::string> place_names, std::vector<Transition> transitions,
                             Marking initial_marking)
    : place_names_(std::move(place_names)),
      transitions_(std::move(transitions)),
      initial_(std::move(initial_marking)) {
  const auto places = static_cast<PlaceId>(place_names_.size());
  if (initial_.size() != place_names_.size())
    throw InvalidNetError("initial marking has " + std::to_string(initial_.size()) + " entries for " +
                          std::to_string(places) + " places");
  if (initial_.empty()) throw InvalidNetError("initial marking is empty");
  for (auto& t : transitions_) {
    if (t.weight <= 0) throw InvalidNetError("transition '" + t.name + "' has a non-positive weight");
    t.weight_value = to_double(t.weight);
    for (auto* arcs : {&t.inputs, &t.outputs}) {
      for (const auto& a : *arcs) {
        if (a.place < 0 || a.place >= places)
          throw InvalidNetError("transition '" + t.name + "' references missing place " + std::to_string(a.place));
        if (a.multiplicity <= 0) throw InvalidNetError("transition '" + t.name + "' has a non-positive arc weight");
      }
      normalize(*arcs);
    }
  }
}

std::int32_t StochasticNet::input_weight(PlaceId p, TransitionId t) const { return arc_weight(transition(t).inputs, p); }

std::int32_t StochasticNet::output_weight(PlaceId p, TransitionId t) const {
  return arc_weight(transition(t).outputs, p);
}

bool StochasticNet::integer_weights() const {
  return std::all_of(transitions_.begin(), transitions_.end(),
                     [](const Transition& t) { return boost::multiprecision::denominator(t.weight) == 1; });
}

PlaceId NetBuilder::add_place(std::string name, std::int32_t tokens) {
  places_.push_back(std::move(name));
  tokens_.push_back(tokens);
  return static_cast<PlaceId>(places_.size() - 1);
}

TransitionId NetBuilder::add_transition(std::string name, std::optional<Activity> label, Rational weight,
                                        const std::vector<PlaceId>& inputs, const std::vector<PlaceId>& outputs) {
  Transition t;
  t.name = std::move(name);
  t.label = std::move(label);
  t.weight = std::move(weight);
  t.inputs = aggregate(inputs);
  t.outputs = aggregate(outputs);
  transitions_.push_back(std::move(t));
  return static_cast<TransitionId>(transitions_.size() - 1);
}

StochasticNet NetBuilder::build() const { return StochasticNet(places_, transitions_, Marking(tokens_)); }

bool is_enabled(const StochasticNet& net, const Marking& m, TransitionId t) {
  for (const auto& a : net.transition(t).inputs)
    if (m[a.place] < a.multiplicity) return false;
  return true;
}

std::vector<TransitionId> enabled_transitions(const StochasticNet& net, const Marking& m) {
  require_marking_of(net, m);
  std::vector<TransitionId> out;
  for (TransitionId t = 0; t < static_cast<TransitionId>(net.num_transitions()); ++t)
    if (is_enabled(net, m, t)) out.push_back(t);
  return out;
}

bool is_deadlock(const StochasticNet& net, const Marking& m) {
  require_marking_of(net, m);
  for (TransitionId t = 0; t < static_cast<TransitionId>(net.num_transitions()); ++t)
    if (is_enabled(net, m, t)) return false;
  return true;
}

Marking fire(const StochasticNet& net, const Marking& m, TransitionId t) {
  require_marking_of(net, m);
  if (!is_enabled(net, m, t))
    throw NotEnabledError("transition '" + net.transition(t).name + "' is not enabled");
  Marking out = m;
  const auto& tr = net.transition(t);
  for (const auto& a : tr.inputs) out[a.place] -= a.multiplicity;
  for (const auto& a : tr.outputs) out[a.place] += a.multiplicity;
  return out;
}

double transition_probability(const StochasticNet& net, const Marking& m, TransitionId t) {
  if (!is_enabled(net, m, t))
    throw NotEnabledError("transition '" + net.transition(t).name + "' is not enabled");
  double total = 0.0;
  for (auto e : enabled_transitions(net, m)) total += net.transition(e).weight_value;
  return net.transition(t).weight_value / total;
}

Rational transition_probability_exact(const StochasticNet& net, const Marking& m, TransitionId t) {
  if (!is_enabled(net, m, t))
    throw NotEnabledError("transition '" + net.transition(t).name + "' is not enabled");
  Rational total = 0;
  for (auto e : enabled_transitions(net, m)) total += net.transition(e).weight;
  return net.transition(t).weight / total;
}

ModelPath replay_path(const StochasticNet& net, std::span<const TransitionId> transitions) {
  ModelPath path;
  path.markings.push_back(net.initial_marking());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto t = transitions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= net.num_transitions())
      throw InvalidPathError("step " + std::to_string(i) + " names an unknown transition");
    if (!is_enabled(net, path.markings.back(), t))
      throw InvalidPathError("step " + std::to_string(i) + ": transition '" + net.transition(t).name +
                             "' is not enabled");
    path.markings.push_back(fire(net, path.markings.back(), t));
    path.transitions.push_back(t);
  }
  if (!is_deadlock(net, path.markings.back())) throw InvalidPathError("path does not end in a deadlock marking");
  return path;
}

namespace {

void check_path(const StochasticNet& net, const ModelPath& path) {
  if (path.markings.size() != path.transitions.size() + 1)
    throw InvalidPathError("path has inconsistent marking count");
  if (path.markings.front() != net.initial_marking()) throw InvalidPathError("path does not start at M0");
  for (std::size_t i = 0; i < path.transitions.size(); ++i) {
    const auto t = path.transitions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= net.num_transitions() || !is_enabled(net, path.markings[i], t) ||
        fire(net, path.markings[i], t) != path.markings[i + 1])
      throw InvalidPathError("path step " + std::to_string(i) + " violates the firing rule");
  }
  if (!is_deadlock(net, path.markings.back())) throw InvalidPathError("path does not end in a deadlock marking");
}

}  // namespace

PathProbability path_probability(const StochasticNet& net, const ModelPath& path) {
  check_path(net, path);
  PathProbability out;
  for (std::size_t i = 0; i < path.transitions.size(); ++i) {
    const double p = transition_probability(net, path.markings[i], path.transitions[i]);
    out.value *= p;
    out.log10 += std::log10(p);
  }
  return out;
}

Rational path_probability_exact(const StochasticNet& net, const ModelPath& path) {
  check_path(net, path);
  Rational out = 1;
  for (std::size_t i = 0; i < path.transitions.size(); ++i)
    out *= transition_probability_exact(net, path.markings[i], path.transitions[i]);
  return out;
}

Trace label_projection(const StochasticNet& net, std::span<const TransitionId> transitions) {
  Trace out;
  for (auto t : transitions)
    if (const auto& label = net.transition(t).label) out.push_back(*label);
  return out;
}

StochasticNet build_trace_net(const Trace& trace) {
  NetBuilder b;
  for (std::size_t i = 0; i <= trace.size(); ++i) b.add_place("s" + std::to_string(i), i == 0 ? 1 : 0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto p = static_cast<PlaceId>(i);
    b.add_transition("e" + std::to_string(i + 1), trace[i], Rational(1), {p}, {p + 1});
  }
  return b.build();
}

Matrices matrices(const StochasticNet& net) {
  Matrices mx;
  mx.places = net.num_places();
  mx.transitions = net.num_transitions();
  mx.consumption.assign(mx.places * mx.transitions, 0);
  mx.incidence.assign(mx.places * mx.transitions, 0);
  for (std::size_t t = 0; t < mx.transitions; ++t) {
    const auto& tr = net.transition(static_cast<TransitionId>(t));
    for (const auto& a : tr.inputs) {
      const auto cell = static_cast<std::size_t>(a.place) * mx.transitions + t;
      mx.incidence[cell] -= a.multiplicity;
      if (arc_weight(tr.outputs, a.place) == 0) mx.consumption[cell] = -a.multiplicity;
    }
    for (const auto& a : tr.outputs)
      mx.incidence[static_cast<std::size_t>(a.place) * mx.transitions + t] += a.multiplicity;
  }
  return mx;
}

}  // namespace stochalign
