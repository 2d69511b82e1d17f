#pragma once

#include <span>
#include <vector>

#include "itree/hyperrect.hpp"
#include "itree/model.hpp"
#include "itree/rng.hpp"
#include "itree/run_result.hpp"

namespace itree {

// Batched self-normalized importance sampling on a truncated proposal.
// The amalgamated weight is the mean sample weight (log-mean-exp).
RunResult is_run(const TargetModel& model, const HyperRect& rect,
                 std::size_t batch_size, RngStream& rng);

// Systematic resampling: n ancestor indices, expected count of index i equal
// to n*w_i/sum(w) within 1.
std::vector<std::size_t> systematic_resample(std::span<const double> weights,
                                             std::size_t n, RngStream& rng);

// State-space model whose global parameters theta are controlled by the tree
// (uniform z mapped through the prior reparameterization) while the latent
// states are handled by a particle filter.
class SsmModel {
 public:
  virtual ~SsmModel() = default;

  virtual std::size_t theta_dim() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t series_length() const = 0;

  virtual std::vector<double> to_theta(const std::vector<double>& z) const = 0;

  // log p(theta); needed by MH-style baselines (proposal equals prior, so
  // the tree itself only uses the likelihood estimate).
  virtual double log_prior(const std::vector<double>& theta) const = 0;

  virtual std::vector<double> init_state(RngStream& rng) const = 0;
  virtual std::vector<double> transition(const std::vector<double>& theta,
                                         const std::vector<double>& x_prev,
                                         RngStream& rng) const = 0;
  virtual double log_obs(const std::vector<double>& theta,
                         const std::vector<double>& x, std::size_t t) const = 0;
};

// One bootstrap-filter sweep with systematic resampling at every step.
// Returns amalg_log_w = log Zhat(theta) + log volume(rect); evals counts
// n_particles * series_length density evaluations.
RunResult smc_sweep(const SsmModel& model, const HyperRect& theta_rect,
                    std::size_t n_particles, RngStream& rng);

// Marginal likelihood estimate of a sweep at a fixed theta (no volume term).
double pf_log_ml(const SsmModel& model, const std::vector<double>& theta,
                 std::size_t n_particles, RngStream& rng);

}  // namespace itree
