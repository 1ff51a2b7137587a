#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "stochalign/io.hpp"
#include "stochalign/net.hpp"
#include "stochalign/random_net.hpp"
#include "stochalign/sync_product.hpp"

namespace stochalign::test {

/// Running example: t1 (a, 1) and t2 (b, 99) compete for p1; t2 forks into the pre-places of
/// t3 (c, 3) and t4 (d, 2); t1 feeds t3 only.
inline StochasticNet n2() {
  NetBuilder b;
  const auto p1 = b.add_place("p1", 1);
  const auto p2 = b.add_place("p2");
  const auto p3 = b.add_place("p3");
  const auto p4 = b.add_place("p4");
  b.add_transition("t1", "a", Rational(1), {p1}, {p2});
  b.add_transition("t2", "b", Rational(99), {p1}, {p2, p3});
  b.add_transition("t3", "c", Rational(3), {p2}, {p4});
  b.add_transition("t4", "d", Rational(2), {p3}, {p4});
  return b.build();
}

inline std::string data_file(const std::string& name) { return std::string(STOCHALIGN_DATA_DIR) + "/" + name; }

inline Trace adc() { return {"a", "d", "c"}; }

/// Small bounded nets of the oracle corpus.
inline gen::NetShape small_shape() {
  gen::NetShape s;
  s.places = 8;
  s.transitions = 8;
  s.max_silent_fraction = 0.3;
  s.min_weight = 1;
  s.max_weight = 10;
  s.alphabet = 5;
  return s;
}

/// Calls `visit` with every firing sequence of the product from its initial marking to a
/// deadlock that has at most `max_len` steps, stopping after `limit` sequences.
inline void for_each_alignment(const SyncProduct& sp, std::size_t max_len,
                               const std::function<void(const std::vector<TransitionId>&)>& visit,
                               std::size_t limit = SIZE_MAX) {
  std::vector<TransitionId> moves;
  std::size_t seen = 0;
  std::function<void(const Marking&)> dfs = [&](const Marking& m) {
    if (seen >= limit) return;
    const auto enabled = enabled_transitions(sp.net(), m);
    if (enabled.empty()) {
      ++seen;
      visit(moves);
      return;
    }
    if (moves.size() >= max_len) return;
    for (auto t : enabled) {
      moves.push_back(t);
      dfs(fire(sp.net(), m, t));
      moves.pop_back();
    }
  };
  dfs(sp.net().initial_marking());
}

}  // namespace stochalign::test
