#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "itree/base_infer.hpp"

namespace itree::models {

// Deterministic part of the chaotic transition.
std::array<double, 3> pickover_step(const std::array<double, 4>& theta,
                                    const std::array<double, 3>& x_prev);

struct ChaosConfig {
  std::size_t series_length = 50;  // desk-scale default; full experiments use 200
  std::size_t obs_dim = 20;        // K
  double trans_sd = 0.1;           // sqrt(0.01)
  double obs_sd = 0.447213595499957939;  // sqrt(0.2)
};

// Chaotic dynamics state-space model: uniform [-pi, pi] priors on the four
// dynamics parameters, latent 3-D states filtered by SMC.
class ChaosModel final : public SsmModel {
 public:
  ChaosModel(ChaosConfig cfg, std::vector<std::vector<double>> obs_matrix,
             std::vector<std::vector<double>> data);

  std::size_t theta_dim() const override { return 4; }
  std::size_t state_dim() const override { return 3; }
  std::size_t series_length() const override { return cfg_.series_length; }

  std::vector<double> to_theta(const std::vector<double>& z) const override;
  double log_prior(const std::vector<double>& theta) const override;
  std::vector<double> init_state(RngStream& rng) const override;
  std::vector<double> transition(const std::vector<double>& theta,
                                 const std::vector<double>& x_prev,
                                 RngStream& rng) const override;
  double log_obs(const std::vector<double>& theta,
                 const std::vector<double>& x, std::size_t t) const override;

  const ChaosConfig& config() const { return cfg_; }

 private:
  ChaosConfig cfg_;
  std::vector<std::vector<double>> obs_matrix_;  // K x 3
  std::vector<std::vector<double>> data_;        // T x K
};

struct ChaosDataset {
  ChaosConfig cfg;
  std::uint64_t seed = 0;
  std::array<double, 4> true_theta{};
  std::vector<std::vector<double>> obs_matrix;
  std::vector<std::vector<double>> observations;

  void save(const std::string& dir) const;
};

// Truth fixed at (a, b, c, d) = (2.5, -2.3, 1.25, -1.5); the observation
// matrix columns are symmetric-Dirichlet(0.1) draws.
ChaosDataset generate_chaos_synthetic(const ChaosConfig& cfg,
                                      std::uint64_t seed);

}  // namespace itree::models
