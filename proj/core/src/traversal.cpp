#include "itree/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "itree/math.hpp"

namespace itree {

double log_exploitation_target(const NodeStats& s, double kappa) {
  if (s.log_sigma2 == pos_inf) return pos_inf;
  double a = s.log_omega == neg_inf ? neg_inf : 2.0 * s.log_omega;
  double b = s.log_sigma2 == neg_inf ? neg_inf
                                     : std::log1p(kappa) + s.log_sigma2;
  double sum = log_add_exp(a, b);
  return sum == neg_inf ? neg_inf : 0.5 * sum;
}

double utility(const TreeNode& child, const TreeNode& parent,
               const TreeNode& sibling, const TraversalParams& params,
               double rho) {
  const double delta = params.delta_schedule ? params.delta_schedule(rho) : 0.0;
  const double alpha = params.alpha_schedule ? params.alpha_schedule(rho) : 0.0;
  const double beta = rho >= params.beta_cutoff ? 0.0 : params.beta;
  const double m = double(child.traversals);

  double log_tau_j = log_exploitation_target(child.stats, params.kappa);
  double log_tau_pa = log_exploitation_target(parent.stats, params.kappa);

  // exploitation: (tau_j / tau_pa)^(1-alpha)
  double exploit;
  if (log_tau_j == pos_inf) {
    return pos_inf;  // unvisited-enough child ranks first outright
  } else if (log_tau_pa == neg_inf || log_tau_pa == pos_inf) {
    exploit = log_tau_j == neg_inf ? 1.0 : 0.0;  // dead or saturated parent
  } else {
    exploit = std::exp((1.0 - alpha) * (log_tau_j - log_tau_pa));
  }

  // targeted exploration, 0 when both siblings report no significant mass
  double ps_sum = child.stats.ps + sibling.stats.ps;
  double explore = ps_sum > 0.0 ? child.stats.ps / ps_sum : 0.0;

  // optimism boost scaled by relative volume
  double vol_ratio =
      std::exp(child.rect.log_volume() - parent.rect.log_volume());
  double boost = beta * vol_ratio * std::log(double(parent.traversals)) /
                 std::sqrt(m);

  return ((1.0 - delta) * exploit + delta * explore + boost) / m;
}

std::vector<int> select_leaf(const Tree& tree, const TraversalParams& params,
                             double rho, RngStream& rng) {
  std::vector<int> path{0};
  int id = 0;
  while (!tree.node(id).is_leaf()) {
    const TreeNode& n = tree.node(id);
    const TreeNode& l = tree.node(n.left);
    const TreeNode& r = tree.node(n.right);
    double ul = utility(l, n, r, params, rho);
    double ur = utility(r, n, l, params, rho);
    if (ul == ur)
      id = rng.uniform() < 0.5 ? n.left : n.right;
    else
      id = ul > ur ? n.left : n.right;
    path.push_back(id);
  }
  return path;
}

std::pair<Schedule, Schedule> default_schedules(const std::string& experiment) {
  // the tanh shapes can poke above 1 early in the run; schedules are defined
  // on [0,1] so clamp them there
  auto tanh_sched = [](double scale, double gain, double center) {
    return [=](double rho) {
      return std::clamp(scale * (1.0 + std::tanh(gain * (center - rho))), 0.0,
                        1.0);
    };
  };
  if (experiment == "gmm")
    return {tanh_sched(0.5, 20.0, 0.9), tanh_sched(0.625, 25.0, 0.95)};
  if (experiment == "chaos")
    return {tanh_sched(0.5, 4.0, 0.7), tanh_sched(0.625, 10.0, 0.8)};
  throw std::invalid_argument("default_schedules: unknown experiment '" +
                              experiment + "'");
}

}  // namespace itree
