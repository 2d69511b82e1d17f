#pragma once

#include <span>

namespace itree {

// Gaussian fit to a node's amalgamated log weights. Zero weights (log = -inf)
// are excluded from the fit but still count as evidence of staying below the
// threshold, so callers pass the full run count separately.
struct LogWeightFit {
  double mean = 0.0;
  double sd = 1.0;
  std::size_t n = 0;  // finite values used
  bool valid = false;
};

inline constexpr double kSdFloor = 1e-6;

// Sample mean and Bessel-corrected sd over the finite entries; invalid when
// fewer than two remain.
LogWeightFit fit_log_weights(std::span<const double> log_weights);

// P(max of T lookahead draws exceeds the threshold) = 1 - F(log_w_th)^T.
double prob_exceed_lookahead(const LogWeightFit& fit, double log_w_th,
                             std::size_t lookahead);

// Bayes-corrected version conditioning on none of the n existing samples
// exceeding the threshold, with the fit truncated at log_w_th + log_w_gap.
double prob_exceed_given_none(const LogWeightFit& fit, double log_w_th,
                              double log_w_gap, std::size_t n,
                              std::size_t lookahead);

}  // namespace itree
