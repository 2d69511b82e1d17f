#include "itree/integration.hpp"

#include <cmath>

#include "itree/math.hpp"

namespace itree {

double log_s_hat(const NodeStats& s) {
  if (s.log_s2 == pos_inf) return pos_inf;
  return s.log_s2 == neg_inf ? neg_inf : 0.5 * s.log_s2;
}

double utility_integration(const TreeNode& child, const TreeNode& parent,
                           const IntegrationParams& params, double rho) {
  const double alpha = params.alpha_schedule ? params.alpha_schedule(rho) : 0.0;
  const double beta = rho >= params.beta_cutoff ? 0.0 : params.beta;
  const double m = double(child.traversals);

  double log_s_j = log_s_hat(child.stats);
  double log_s_pa = log_s_hat(parent.stats);

  double exploit;
  if (log_s_j == pos_inf) {
    return pos_inf;  // under-visited child ranks first outright
  } else if (log_s_pa == neg_inf || log_s_pa == pos_inf) {
    exploit = 1.0;  // degenerate parent spread: ratio is uninformative
  } else {
    exploit = std::exp((1.0 - alpha) * (log_s_j - log_s_pa));
  }

  double vol_ratio =
      std::exp(child.rect.log_volume() - parent.rect.log_volume());
  double boost = beta * vol_ratio * std::log(double(parent.traversals)) /
                 std::sqrt(m);

  return (exploit + boost) / m;
}

std::vector<int> select_leaf_integration(const Tree& tree,
                                         const IntegrationParams& params,
                                         double rho, RngStream& rng) {
  std::vector<int> path{0};
  int id = 0;
  while (!tree.node(id).is_leaf()) {
    const TreeNode& n = tree.node(id);
    double ul = utility_integration(tree.node(n.left), n, params, rho);
    double ur = utility_integration(tree.node(n.right), n, params, rho);
    if (ul == ur)
      id = rng.uniform() < 0.5 ? n.left : n.right;
    else
      id = ul > ur ? n.left : n.right;
    path.push_back(id);
  }
  return path;
}

}  // namespace itree
