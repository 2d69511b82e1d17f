#pragma once

#include <functional>
#include <string>
#include <vector>

#include "itree/rng.hpp"
#include "itree/tree.hpp"

namespace itree {

using Schedule = std::function<double(double)>;  // rho in [0,1] -> [0,1]

struct TraversalParams {
  double kappa = 1.0;
  double beta = 0.1;
  double lambda = 1.2;
  Schedule delta_schedule;
  Schedule alpha_schedule;
  std::size_t lookahead = 1000;
  double log_w_gap = 10.0;
  double beta_cutoff = 0.75;  // fraction of iterations after which beta := 0

  PropagationParams propagation() const {
    return {lambda, lookahead, log_w_gap, false};
  }
};

// tau-hat: sqrt(omega^2 + (1+kappa) sigma^2), in log space.
double log_exploitation_target(const NodeStats& s, double kappa);

// Utility of a child against its parent and sibling at progress rho.
double utility(const TreeNode& child, const TreeNode& parent,
               const TreeNode& sibling, const TraversalParams& params,
               double rho);

// Path from root to the selected leaf, recursively maximizing utility.
// Ties break uniformly at random.
std::vector<int> select_leaf(const Tree& tree, const TraversalParams& params,
                             double rho, RngStream& rng);

// Annealing schedules for the shipped experiment presets ("gmm" | "chaos").
std::pair<Schedule, Schedule> default_schedules(const std::string& experiment);

// Volume-free reference for the exploration threshold: the global maximum of
// (log w - log volume). Per-node threshold is ref + log volume of the node.
struct GlobalThreshold {
  double ref = -std::numeric_limits<double>::infinity();

  // Returns true when the reference moved (all p-hat-s become stale).
  bool update(double amalg_log_w, double log_volume) {
    double v = amalg_log_w - log_volume;
    if (v > ref) {
      ref = v;
      return true;
    }
    return false;
  }
};

}  // namespace itree
