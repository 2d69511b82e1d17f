#pragma once

#include "itree/model.hpp"

namespace itree::models {

// 1-D conjugate Gaussian: prior N(0, prior_sd^2) used as proposal, one
// Gaussian observation. The marginal likelihood is available in closed form,
// which makes this the oracle model for the consistency tests.
class ConjugateGaussian1D final : public TargetModel {
 public:
  ConjugateGaussian1D(double y, double obs_sd, double prior_sd = 1.0);

  std::size_t dim() const override { return 1; }
  std::vector<double> to_params(const std::vector<double>& z) const override;
  double log_ratio(const std::vector<double>& x) const override;

  double log_z() const;                 // analytic marginal likelihood
  double posterior_mean() const;
  double posterior_sd() const;

 private:
  double y_, obs_sd_, prior_sd_;
};

// Target proportional to the proposal: gamma = scale * q. Every truncated
// weight equals scale * volume; handy for calibration tests.
class ScaledProposal final : public TargetModel {
 public:
  ScaledProposal(std::size_t dim, double scale = 1.0)
      : dim_(dim), log_scale_(std::log(scale)) {}

  std::size_t dim() const override { return dim_; }
  std::vector<double> to_params(const std::vector<double>& z) const override {
    return z;
  }
  double log_ratio(const std::vector<double>&) const override {
    return log_scale_;
  }

 private:
  std::size_t dim_;
  double log_scale_;
};

}  // namespace itree::models
