#include "itree/refine.hpp"

#include <algorithm>
#include <cmath>

#include "itree/math.hpp"

namespace itree {

namespace {

// ESS of the node's local amalgamated weights only.
double local_ess(const TreeNode& node) {
  double lsw = neg_inf, lsw2 = neg_inf;
  for (const auto& r : node.runs) {
    lsw = log_add_exp(lsw, r.amalg_log_w);
    lsw2 = log_add_exp(lsw2, r.amalg_log_w == neg_inf ? neg_inf
                                                      : 2.0 * r.amalg_log_w);
  }
  if (lsw == neg_inf) return 0.0;
  return std::exp(2.0 * lsw - lsw2);
}

}  // namespace

bool should_split(const TreeNode& node, const RefineConfig& cfg) {
  if (!node.is_leaf()) return false;
  const std::size_t n = node.local_runs();
  if (n < cfg.min_runs) return false;
  return local_ess(node) / double(n) <= cfg.max_ess_ratio;
}

std::vector<SplitCandidate> propose_candidates(const TreeNode& node,
                                               std::size_t n_cand,
                                               RngStream& rng) {
  std::vector<SplitCandidate> out;
  if (node.local_runs() < 2) return out;
  bool any_mass = false;
  for (const auto& r : node.runs) any_mass |= r.amalg_log_w != neg_inf;
  if (!any_mass) return out;

  const double log_n = std::log(double(node.local_runs()));
  out.reserve(n_cand);
  for (std::size_t k = 0; k < n_cand; ++k) {
    std::size_t dim = rng.index(node.rect.dim());
    double point = rng.uniform(node.rect.lo[dim], node.rect.hi[dim]);
    if (!split_point_valid(node.rect, dim, point)) {
      --k;  // guard margin hit; essentially never in practice
      continue;
    }
    SplitCandidate c;
    c.dim = dim;
    c.point = point;
    std::tie(c.left, c.right) = split_rect(node.rect, dim, point);
    double lol = neg_inf, lor = neg_inf;
    for (const auto& r : node.runs) {
      if (r.rep_z[dim] < point)
        lol = log_add_exp(lol, r.amalg_log_w);
      else
        lor = log_add_exp(lor, r.amalg_log_w);
    }
    c.log_omega_left = lol == neg_inf ? neg_inf : lol - log_n;
    c.log_omega_right = lor == neg_inf ? neg_inf : lor - log_n;
    out.push_back(std::move(c));
  }
  return out;
}

double split_loss(const SplitCandidate& cand) {
  // normalized internally: scaling all weights shifts every candidate's loss
  // identically, so the argmin is unchanged
  double total = log_add_exp(cand.log_omega_left, cand.log_omega_right);
  double pl = cand.log_omega_left == neg_inf
                  ? 0.0
                  : std::exp(cand.log_omega_left - total);
  double pr = cand.log_omega_right == neg_inf
                  ? 0.0
                  : std::exp(cand.log_omega_right - total);
  double loss = 0.0;
  if (pl > 0.0) loss += pl * std::log(cand.left.volume() / pl);
  if (pr > 0.0) loss += pr * std::log(cand.right.volume() / pr);
  return loss;
}

SplitCandidate shrink_split(const TreeNode& node, const SplitCandidate& best) {
  double lo = node.rect.lo[best.dim], hi = node.rect.hi[best.dim];
  bool shrink_left = best.log_omega_left < best.log_omega_right;
  double point = shrink_left ? lo + 0.75 * (best.point - lo)
                             : best.point + 0.25 * (hi - best.point);

  SplitCandidate out = best;
  out.point = point;
  std::tie(out.left, out.right) = split_rect(node.rect, best.dim, point);
  return out;
}

bool accept_split(std::span<const double> left_logw,
                  std::span<const double> right_logw, double sig_level) {
  // -inf amalgamated weights carry no usable location for the test; map them
  // to the side's minimum finite value minus a large gap
  auto prep = [](std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    double lo = pos_inf;
    for (double x : out)
      if (std::isfinite(x)) lo = std::min(lo, x);
    double sub = std::isfinite(lo) ? lo - 100.0 : -1e6;
    for (double& x : out)
      if (!std::isfinite(x)) x = sub;
    return out;
  };
  auto a = prep(left_logw), b = prep(right_logw);
  return welch_t_test(a, b).p_value < sig_level;
}

RefineOutcome refine(Tree& tree, int leaf_id, const BaseRunner& base,
                     const RefineConfig& cfg, RngStream& rng) {
  RefineOutcome outcome;
  const std::size_t b = cfg.runs_per_refinement;
  TreeNode& leaf = tree.node(leaf_id);

  auto extend = [&]() {
    HyperRect rect = tree.node(leaf_id).rect;
    for (std::size_t i = 0; i < b; ++i) {
      RunResult run = base(rect, i);
      outcome.evals += run.evals;
      tree.add_run(leaf_id, std::move(run));
    }
    outcome.action = RefineAction::Extended;
    outcome.runs_added = b;
  };

  if (!should_split(leaf, cfg) || b < 2) {
    extend();
    return outcome;
  }

  auto candidates = propose_candidates(leaf, cfg.n_candidates, rng);
  if (candidates.empty()) {
    extend();
    return outcome;
  }

  std::size_t best = 0;
  double best_loss = split_loss(candidates[0]);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    double l = split_loss(candidates[k]);
    if (l < best_loss) {
      best_loss = l;
      best = k;
    }
  }
  SplitCandidate chosen = shrink_split(leaf, candidates[best]);

  std::vector<RunResult> left_runs, right_runs;
  std::vector<double> left_logw, right_logw;
  for (std::size_t i = 0; i < b; ++i) {
    left_runs.push_back(base(chosen.left, i));
    outcome.evals += left_runs.back().evals;
    left_logw.push_back(left_runs.back().amalg_log_w);
  }
  for (std::size_t i = 0; i < b; ++i) {
    right_runs.push_back(base(chosen.right, b + i));
    outcome.evals += right_runs.back().evals;
    right_logw.push_back(right_runs.back().amalg_log_w);
  }
  outcome.runs_added = 2 * b;

  if (accept_split(left_logw, right_logw, cfg.sig_level)) {
    auto [l, r] = tree.attach_children(leaf_id, chosen.left, chosen.right);
    for (auto& run : left_runs) tree.add_run(l, std::move(run));
    for (auto& run : right_runs) tree.add_run(r, std::move(run));
    outcome.action = RefineAction::Split;
  } else {
    // merge back: rescale child weights to be valid draws under the parent's
    // truncated proposal (both children always merge together)
    double parent_lv = tree.node(leaf_id).rect.log_volume();
    auto merge = [&](std::vector<RunResult>& runs, const HyperRect& child) {
      double shift = parent_lv - child.log_volume();
      for (auto& run : runs) {
        if (run.amalg_log_w != neg_inf) run.amalg_log_w += shift;
        tree.add_run(leaf_id, std::move(run));
      }
    };
    merge(left_runs, chosen.left);
    merge(right_runs, chosen.right);
    outcome.action = RefineAction::SplitRejected;
  }
  return outcome;
}

}  // namespace itree
