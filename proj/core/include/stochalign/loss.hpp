#pragma once

namespace stochalign {

/// Balance between edit distance (alpha = 1) and model-path probability (alpha = 0).
class LossParams {
 public:
  /// Throws DomainError unless 0 <= alpha <= 1.
  explicit LossParams(double alpha);

  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Stochastic alignment loss of a path with edit distance `distance` and base-10 log-probability
/// `log10_probability`:
///   alpha = 1:  lg(d + 1)
///   alpha = 0:  1 - lg p
///   otherwise:  lg(d + 1)^alpha * (1 - lg p)^(1 - alpha)
/// Throws DomainError for negative distance or log10_probability > 0. A log-probability of
/// -infinity yields +infinity whenever the probability factor participates.
double loss(double distance, double log10_probability, const LossParams& params);

/// Search score: loss of (g_d + h_d, log g_p + log h_p).
double f_score(double g_distance, double h_distance, double log10_g_probability, double log10_h_probability,
               const LossParams& params);

}  // namespace stochalign
