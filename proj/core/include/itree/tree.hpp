#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "itree/hyperrect.hpp"
#include "itree/logweight.hpp"
#include "itree/run_result.hpp"

namespace itree {

// Parameters needed to propagate node statistics.
struct PropagationParams {
  double lambda = 1.2;          // child preference scaling
  std::size_t lookahead = 1000;  // T for the exceedance probability
  double log_w_gap = 10.0;
  bool track_integrand = false;
};

// Statistics propagated through the tree. All weight-scale quantities are
// held in log space.
struct NodeStats {
  double c = 0.0;               // child preference factor
  double log_omega = 0.0;       // marginal mass estimate
  double log_xi = 0.0;          // log(zeta^2 / M)
  double log_sigma2 = 0.0;      // single-traversal weight variance (+inf if M<2)
  double ess = 0.0;
  double ps = 0.0;              // significant-mass probability
  LogWeightFit fit;             // Gaussian fit of local log weights
  // integration variant: same stack over w*f
  double log_omega_f = 0.0;
  double log_xi_f = 0.0;
  double log_s2 = 0.0;
};

struct TreeNode {
  int id = 0;
  int parent = -1;
  int left = -1;
  int right = -1;
  int depth = 0;
  HyperRect rect;
  std::vector<RunResult> runs;  // local estimate, one amalgamated weight each
  std::size_t traversals = 0;   // M_j: runs in the whole subtree
  std::size_t leaf_count = 1;
  double leaf_depth_sum = 0.0;
  NodeStats stats;

  bool is_leaf() const { return left < 0; }
  std::size_t local_runs() const { return runs.size(); }  // N_j
};

struct WeightedPoint {
  std::vector<double> x;
  double weight = 0.0;
};

class Tree {
 public:
  explicit Tree(std::size_t dim);

  const TreeNode& node(int id) const { return nodes_[std::size_t(id)]; }
  TreeNode& node(int id) { return nodes_[std::size_t(id)]; }
  const TreeNode& root() const { return nodes_[0]; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t dim() const { return dim_; }

  std::size_t n_leaves() const;
  int max_depth() const;
  std::vector<int> leaf_ids() const;

  // Appends a run to a node's local estimate and bumps traversal counts up
  // to the root. Does not recompute statistics.
  void add_run(int id, RunResult run);

  // Attaches two children covering the node's rect.
  std::pair<int, int> attach_children(int id, const HyperRect& left,
                                      const HyperRect& right);

  // Recomputes statistics for a node from its local runs and (current)
  // children, including p-hat-s against the threshold reference.
  void recompute(int id, const PropagationParams& p, double threshold_ref);

  // Recomputes a node and all its ancestors (Algorithm-style propagation).
  void propagate_from(int id, const PropagationParams& p, double threshold_ref);

  // Full bottom-up recomputation, used when the global threshold moves or
  // after deserialization.
  void recompute_all(const PropagationParams& p, double threshold_ref);

  double log_ml() const { return root().stats.log_omega; }
  double root_ess() const { return root().stats.ess; }

  // Highest (log w - log volume) over all runs; the volume-free threshold
  // reference value.
  double max_volume_free_log_w() const;

  // Self-normalized expectation of f under the combined empirical measure.
  double estimate(const std::function<double(const std::vector<double>&)>& f) const;

  // Materialized combined measure; weights sum to 1, order deterministic.
  std::vector<WeightedPoint> flatten_measure() const;

  // Self-normalized integral estimate using the stored per-run integrand
  // values (known-integrand variant).
  double estimate_integral() const;

  std::string to_json() const;
  static Tree from_json(const std::string& text);

 private:
  std::vector<TreeNode> nodes_;
  std::size_t dim_;

  void refresh_leaf_depth(TreeNode& n);
  void flatten_node(int id, double log_k, std::vector<WeightedPoint>& out,
                    std::vector<double>& log_w) const;
};

// Mixing coefficient between a node's local estimate and its children's,
// scaled so deeper (better adapted) estimates get extra preference.
double child_preference(const TreeNode& node, double lambda);

}  // namespace itree
