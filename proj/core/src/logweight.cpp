#include "itree/logweight.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "itree/math.hpp"

namespace itree {

namespace {

// log of the fitted Gaussian CDF at x, accurate in both tails.
double log_cdf(const LogWeightFit& fit, double x) {
  double z = (x - fit.mean) / fit.sd;
  if (z > 0.0) {
    double s = norm_cdf(-z);  // survival
    return s >= 1.0 ? 0.0 : std::log1p(-s);
  }
  double f = norm_cdf(z);
  return f <= 0.0 ? neg_inf : std::log(f);
}

}  // namespace

LogWeightFit fit_log_weights(std::span<const double> log_weights) {
  std::vector<double> finite;
  finite.reserve(log_weights.size());
  for (double lw : log_weights)
    if (std::isfinite(lw)) finite.push_back(lw);

  LogWeightFit fit;
  if (finite.size() < 2) return fit;
  MeanSd ms = mean_sd(finite);
  fit.mean = ms.mean;
  fit.sd = std::max(ms.sd, kSdFloor);
  fit.n = finite.size();
  fit.valid = true;
  return fit;
}

double prob_exceed_lookahead(const LogWeightFit& fit, double log_w_th,
                             std::size_t lookahead) {
  double log_f = log_cdf(fit, log_w_th);
  if (log_f == neg_inf) return 1.0;
  double log_none = double(lookahead) * log_f;  // log F^T
  double p = -std::expm1(log_none);
  return std::clamp(p, 0.0, 1.0);
}

double prob_exceed_given_none(const LogWeightFit& fit, double log_w_th,
                              double log_w_gap, std::size_t n,
                              std::size_t lookahead) {
  double log_f_th = log_cdf(fit, log_w_th);
  double log_f_tr = log_cdf(fit, log_w_th + log_w_gap);

  // likelihood that all n samples stay below the threshold, under the fit
  // truncated at log_w_tr; no information when the truncated mass vanishes
  double log_lik = 0.0;
  if (log_f_tr != neg_inf)
    log_lik = double(n) * (log_f_th - log_f_tr);

  if (log_f_th == neg_inf) return 1.0;
  double log_none = double(lookahead) * log_f_th;  // log(1 - prior)
  double prior = -std::expm1(log_none);
  if (prior <= 0.0) return 0.0;

  double log_num = std::log(prior) + log_lik;
  double log_den = log_add_exp(log_num, log_none);
  double p = std::exp(log_num - log_den);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace itree
