#pragma once

#include <cstdint>

#include "itree/model.hpp"

namespace itree::models {

struct GmmConfig {
  std::size_t components = 4;  // K
  std::size_t data_dim = 2;    // D
  std::size_t n_data = 200;
  double prior_sd = 1.0;                 // Sigma_mu = prior_sd^2 I
  double obs_sd = 0.447213595499957939;  // sqrt(0.2)
};

// Mixture-of-Gaussians mean inference with the assignments marginalized by
// summation. Parameters are the stacked component means, proposal is the
// prior.
class GmmModel final : public TargetModel {
 public:
  GmmModel(GmmConfig cfg, std::vector<std::vector<double>> data);

  std::size_t dim() const override {
    return cfg_.components * cfg_.data_dim;
  }
  std::vector<double> to_params(const std::vector<double>& z) const override;
  double log_ratio(const std::vector<double>& mu) const override;

  // log prior + log likelihood, exposed for the reference-oracle tests
  double log_gamma(const std::vector<double>& mu) const;

  const GmmConfig& config() const { return cfg_; }
  const std::vector<std::vector<double>>& data() const { return data_; }

 private:
  GmmConfig cfg_;
  std::vector<std::vector<double>> data_;
};

struct GmmDataset {
  GmmConfig cfg;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> true_means;
  std::vector<std::vector<double>> observations;

  void save(const std::string& dir) const;  // CSV + JSON sidecar
};

GmmDataset generate_gmm_synthetic(const GmmConfig& cfg, std::uint64_t seed);

}  // namespace itree::models
