#include "stochalign/loss.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stochalign/errors.hpp"

namespace stochalign {

LossParams::LossParams(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1], got " + std::to_string(alpha));
}

double loss(double distance, double log10_probability, const LossParams& params) {
  if (!(distance >= 0.0)) throw DomainError("edit distance must be non-negative");
  if (log10_probability > 0.0 || std::isnan(log10_probability))
    throw DomainError("log10 probability must be <= 0");

  const double alpha = params.alpha();
  const double distance_term = std::log10(distance + 1.0);
  if (alpha == 1.0) return distance_term;

  if (std::isinf(log10_probability)) return std::numeric_limits<double>::infinity();
  const double probability_term = 1.0 - log10_probability;
  if (alpha == 0.0) return probability_term;
  return std::pow(distance_term, alpha) * std::pow(probability_term, 1.0 - alpha);
}

double f_score(double g_distance, double h_distance, double log10_g_probability, double log10_h_probability,
               const LossParams& params) {
  return loss(g_distance + h_distance, log10_g_probability + log10_h_probability, params);
}

}  // namespace stochalign
