#include "stochalign/random_net.hpp"

#include <algorithm>
#include <memory>
#include <set>

namespace stochalign::gen {

namespace {

struct Block {
  enum Kind { Leaf, Seq, Xor, And, Loop } kind = Leaf;
  std::unique_ptr<Block> a, b;
  bool silent = false;
};

struct Delta {
  Block::Kind kind;
  std::size_t places, transitions, silent;
  int weight;
};

constexpr Delta kOps[] = {
    {Block::Seq, 1, 1, 0, 3},
    {Block::Xor, 0, 1, 0, 2},
    {Block::And, 4, 3, 2, 1},
    {Block::Loop, 1, 2, 1, 1},
};

void collect_leaves(Block& b, std::vector<Block*>& out) {
  if (b.kind == Block::Leaf) {
    out.push_back(&b);
    return;
  }
  collect_leaves(*b.a, out);
  collect_leaves(*b.b, out);
}

std::string activity_name(std::size_t i) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i-- > 0);
  return s;
}

struct Emitter {
  std::mt19937_64& rng;
  const NetShape& shape;
  NetBuilder builder;
  std::size_t places = 0, transitions = 0;

  PlaceId place(std::int32_t tokens = 0) { return builder.add_place("p" + std::to_string(++places), tokens); }

  Rational weight() {
    std::uniform_int_distribution<std::int64_t> w(shape.min_weight, shape.max_weight);
    return Rational(w(rng));
  }

  void transition(std::optional<Activity> label, std::vector<PlaceId> in, std::vector<PlaceId> out) {
    builder.add_transition("t" + std::to_string(++transitions), std::move(label), weight(), in, out);
  }

  void emit(const Block& b, PlaceId in, PlaceId out) {
    switch (b.kind) {
      case Block::Leaf: {
        std::optional<Activity> label;
        if (!b.silent) {
          std::uniform_int_distribution<std::size_t> pick(0, std::max<std::size_t>(shape.alphabet, 1) - 1);
          label = activity_name(pick(rng));
        }
        transition(label, {in}, {out});
        break;
      }
      case Block::Seq: {
        const auto mid = place();
        emit(*b.a, in, mid);
        emit(*b.b, mid, out);
        break;
      }
      case Block::Xor:
        emit(*b.a, in, out);
        emit(*b.b, in, out);
        break;
      case Block::And: {
        const auto a_in = place(), b_in = place(), a_out = place(), b_out = place();
        transition(std::nullopt, {in}, {a_in, b_in});
        emit(*b.a, a_in, a_out);
        emit(*b.b, b_in, b_out);
        transition(std::nullopt, {a_out, b_out}, {out});
        break;
      }
      case Block::Loop: {
        const auto mid = place();
        emit(*b.a, in, mid);
        emit(*b.b, mid, in);
        transition(std::nullopt, {mid}, {out});
        break;
      }
    }
  }
};

}  // namespace

StochasticNet random_block_net(std::mt19937_64& rng, const NetShape& shape) {
  auto root = std::make_unique<Block>();
  std::size_t places = 2, transitions = 1, silent = 0;
  const std::size_t target_places = std::max<std::size_t>(shape.places, 2);
  const std::size_t target_transitions = std::max<std::size_t>(shape.transitions, 1);
  const auto silent_budget =
      static_cast<std::size_t>(shape.max_silent_fraction * static_cast<double>(target_transitions) + 1e-9);

  const auto grow = [&](const Delta& op) {
    std::vector<Block*> leaves;
    collect_leaves(*root, leaves);
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    Block* leaf = leaves[pick(rng)];
    leaf->kind = op.kind;
    leaf->a = std::make_unique<Block>();
    leaf->b = std::make_unique<Block>();
    places += op.places;
    transitions += op.transitions;
    silent += op.silent;
  };

  // A loop first, when allowed and it fits, so that loop nets really contain one.
  const auto& loop = kOps[3];
  if (shape.loops && places + loop.places <= target_places && transitions + loop.transitions <= target_transitions &&
      silent + loop.silent <= silent_budget)
    grow(loop);

  while (places < target_places) {
    std::vector<const Delta*> fits;
    std::vector<int> weights;
    for (const auto& op : kOps) {
      if (op.kind == Block::Loop && !shape.loops) continue;
      if (op.kind == Block::And && !shape.parallel) continue;
      if (op.places == 0) continue;
      if (places + op.places > target_places || transitions + op.transitions > target_transitions ||
          silent + op.silent > silent_budget)
        continue;
      fits.push_back(&op);
      weights.push_back(op.weight);
    }
    if (fits.empty()) break;
    std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
    grow(*fits[choose(rng)]);
  }
  while (transitions < target_transitions) grow(kOps[1]);

  // Spend part of the remaining silent budget on plain leaves.
  std::vector<Block*> leaves;
  collect_leaves(*root, leaves);
  std::bernoulli_distribution make_silent(0.15);
  for (auto* leaf : leaves) {
    if (silent >= silent_budget) break;
    if (make_silent(rng)) {
      leaf->silent = true;
      ++silent;
    }
  }

  Emitter e{rng, shape, {}};
  const auto source = e.place(1);
  const auto sink = e.place();
  e.emit(*root, source, sink);
  return e.builder.build();
}

StochasticNet random_small_net(std::mt19937_64& rng, const NetShape& limits) {
  NetShape shape = limits;
  std::uniform_int_distribution<std::size_t> p(2, std::max<std::size_t>(limits.places, 2));
  std::uniform_int_distribution<std::size_t> t(1, std::max<std::size_t>(limits.transitions, 1));
  shape.places = p(rng);
  shape.transitions = t(rng);
  return random_block_net(rng, shape);
}

Trace simulate_trace(const StochasticNet& net, std::mt19937_64& rng, std::size_t max_steps) {
  Trace out;
  Marking m = net.initial_marking();
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto enabled = enabled_transitions(net, m);
    if (enabled.empty()) break;
    std::vector<double> w;
    for (auto t : enabled) w.push_back(net.transition(t).weight_value);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    const auto t = enabled[pick(rng)];
    if (const auto& label = net.transition(t).label) out.push_back(*label);
    m = fire(net, m, t);
  }
  return out;
}

Trace add_noise(const Trace& trace, std::mt19937_64& rng, double noise, const std::vector<Activity>& alphabet) {
  if (alphabet.empty()) return trace;
  std::bernoulli_distribution hit(noise);
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  Trace out;
  for (const auto& a : trace) {
    if (!hit(rng)) {
      out.push_back(a);
      continue;
    }
    switch (op(rng)) {
      case 0:
        out.push_back(alphabet[pick(rng)]);
        break;
      case 1:
        break;
      default:
        out.push_back(alphabet[pick(rng)]);
        out.push_back(a);
        break;
    }
  }
  return out;
}

std::vector<Activity> net_alphabet(const StochasticNet& net) {
  std::set<Activity> labels;
  for (const auto& t : net.transitions())
    if (t.label) labels.insert(*t.label);
  return {labels.begin(), labels.end()};
}

Trace random_trace_of_length(const StochasticNet& net, std::mt19937_64& rng, std::size_t length, double noise) {
  const auto alphabet = net_alphabet(net);
  Trace best;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (int attempt = 0; attempt < 300 && best_gap > 0; ++attempt) {
    auto run = simulate_trace(net, rng, 4 * length + 50);
    const auto gap = run.size() > length ? run.size() - length : length - run.size();
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(run);
    }
  }
  Trace out = add_noise(best, rng, noise, alphabet);
  while (out.size() > length) {
    std::uniform_int_distribution<std::size_t> at(0, out.size() - 1);
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(at(rng)));
  }
  while (out.size() < length && !alphabet.empty()) {
    std::uniform_int_distribution<std::size_t> at(0, out.size());
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(at(rng)), alphabet[pick(rng)]);
  }
  return out;
}

}  // namespace stochalign::gen
