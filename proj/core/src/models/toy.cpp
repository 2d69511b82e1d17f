#include "itree/models/toy.hpp"

#include <cmath>

#include "itree/math.hpp"

namespace itree::models {

ConjugateGaussian1D::ConjugateGaussian1D(double y, double obs_sd,
                                         double prior_sd)
    : y_(y), obs_sd_(obs_sd), prior_sd_(prior_sd) {}

std::vector<double> ConjugateGaussian1D::to_params(
    const std::vector<double>& z) const {
  return {prior_sd_ * norm_ppf(z[0])};
}

double ConjugateGaussian1D::log_ratio(const std::vector<double>& x) const {
  // gamma = prior * likelihood, q = prior, so the ratio is the likelihood
  return norm_log_pdf(y_, x[0], obs_sd_);
}

double ConjugateGaussian1D::log_z() const {
  return norm_log_pdf(y_, 0.0, std::sqrt(prior_sd_ * prior_sd_ +
                                         obs_sd_ * obs_sd_));
}

double ConjugateGaussian1D::posterior_mean() const {
  double p2 = prior_sd_ * prior_sd_, o2 = obs_sd_ * obs_sd_;
  return y_ * p2 / (p2 + o2);
}

double ConjugateGaussian1D::posterior_sd() const {
  double p2 = prior_sd_ * prior_sd_, o2 = obs_sd_ * obs_sd_;
  return std::sqrt(p2 * o2 / (p2 + o2));
}

}  // namespace itree::models
