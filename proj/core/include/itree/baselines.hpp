#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itree/base_infer.hpp"
#include "itree/traversal.hpp"

namespace itree {

struct VanillaIsResult {
  double log_ml = 0.0;
  double ess = 0.0;
  std::vector<WeightedPoint> measure;  // normalized
  std::size_t evals = 0;
};

// Non-adaptive importance sampling on the full unit hypercube.
VanillaIsResult vanilla_is(const TargetModel& model, std::size_t budget,
                           RngStream& rng);

// Self-normalized integral estimate from a vanilla IS pass (known-f variant).
double vanilla_is_integral(const TargetModel& model, std::size_t budget,
                           RngStream& rng);

// MCTS-flavored ablation: constant delta = 0, alpha = 0, beta = 0.5, with the
// optimism boost kept active throughout.
TraversalParams naive_it_preset();

struct PmmhState {
  std::vector<double> theta;
  double log_z = 0.0;        // current pseudo-marginal estimate
  double step_sd = 0.02;     // isotropic random walk, covariance step_sd^2 I
  std::size_t n_particles = 0;
  std::size_t accepted = 0;

  struct TraceRow {
    std::size_t iteration = 0;
    std::vector<double> theta;
    double log_z = 0.0;
    bool accepted = false;
  };
  std::vector<TraceRow> trace;
};

// Chain initialized from the prior; one sweep establishes the initial log Z.
PmmhState pmmh_init(const SsmModel& model, std::size_t n_particles,
                    RngStream& rng);

// One pseudo-marginal Metropolis-Hastings step with a symmetric random walk
// proposal. A dead sweep (log Z' = -inf) or zero-prior proposal rejects.
void pmmh_step(const SsmModel& model, PmmhState& state, RngStream& rng);

void write_pmmh_trace_csv(const PmmhState& state, const std::string& path);

}  // namespace itree
