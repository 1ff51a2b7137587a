#pragma once

#include <cstdint>
#include <random>

#include "stochalign/net.hpp"

namespace stochalign::gen {

/// Shape of a generated block-structured net (sequence, exclusive choice, parallel, loop).
/// Every generated net is safe, has one initial token, and reaches the deadlock with one token
/// in the final place from every reachable marking.
struct NetShape {
  std::size_t places = 8;       ///< exact place count when reachable, otherwise an upper bound
  std::size_t transitions = 8;  ///< exact transition count when reachable, otherwise an upper bound
  double max_silent_fraction = 0.3;
  bool loops = true;
  bool parallel = true;
  std::int64_t min_weight = 1;
  std::int64_t max_weight = 10;
  std::size_t alphabet = 6;  ///< labels are drawn from the first `alphabet` of a, b, c, ...
};

StochasticNet random_block_net(std::mt19937_64& rng, const NetShape& shape);

/// Small random net: place and transition counts drawn uniformly up to the shape's limits.
StochasticNet random_small_net(std::mt19937_64& rng, const NetShape& limits);

/// Visible labels of one random run, firing by weight until a deadlock or `max_steps` firings.
Trace simulate_trace(const StochasticNet& net, std::mt19937_64& rng, std::size_t max_steps = 200);

/// Each position is, with probability `noise`, replaced, deleted, or preceded by an inserted
/// activity (one third each). Activities come from `alphabet`.
Trace add_noise(const Trace& trace, std::mt19937_64& rng, double noise, const std::vector<Activity>& alphabet);

/// Visible labels of the net, sorted and deduplicated.
std::vector<Activity> net_alphabet(const StochasticNet& net);

/// A trace of exactly `length` activities: the simulated run closest to that length, trimmed by
/// random deletions or padded by random insertions, then noised.
Trace random_trace_of_length(const StochasticNet& net, std::mt19937_64& rng, std::size_t length, double noise);

}  // namespace stochalign::gen
