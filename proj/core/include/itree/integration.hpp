#pragma once

#include "itree/traversal.hpp"
#include "itree/tree.hpp"

namespace itree {

// Traversal parameters for the known-integrand variant. There is no targeted
// exploration term; exploitation ranks children by the standard deviation of
// the integrand-scaled weights.
struct IntegrationParams {
  double beta = 0.1;
  double lambda = 1.2;
  Schedule alpha_schedule;
  double beta_cutoff = 0.75;

  PropagationParams propagation() const { return {lambda, 1000, 10.0, true}; }
};

// log of s-hat, the sigma-hat analog over w*f. +inf surrogate when M < 2.
double log_s_hat(const NodeStats& s);
inline double s_hat(const NodeStats& s) { return std::exp(log_s_hat(s)); }

// (1/M_j) [ (s_j / s_pa)^(1-alpha) + beta (|B_j|/|B_pa|) log(M_pa)/sqrt(M_j) ]
double utility_integration(const TreeNode& child, const TreeNode& parent,
                           const IntegrationParams& params, double rho);

std::vector<int> select_leaf_integration(const Tree& tree,
                                         const IntegrationParams& params,
                                         double rho, RngStream& rng);

}  // namespace itree
