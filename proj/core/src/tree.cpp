#include "itree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "itree/math.hpp"

namespace itree {

using nlohmann::json;

Tree::Tree(std::size_t dim) : dim_(dim) {
  TreeNode root;
  root.id = 0;
  root.rect = HyperRect::unit(dim);
  nodes_.push_back(std::move(root));
}

std::size_t Tree::n_leaves() const {
  std::size_t n = 0;
  for (const auto& nd : nodes_) n += nd.is_leaf();
  return n;
}

int Tree::max_depth() const {
  int d = 0;
  for (const auto& nd : nodes_) d = std::max(d, nd.depth);
  return d;
}

std::vector<int> Tree::leaf_ids() const {
  std::vector<int> out;
  for (const auto& nd : nodes_)
    if (nd.is_leaf()) out.push_back(nd.id);
  return out;
}

void Tree::add_run(int id, RunResult run) {
  node(id).runs.push_back(std::move(run));
  for (int j = id; j >= 0; j = node(j).parent) ++node(j).traversals;
}

std::pair<int, int> Tree::attach_children(int id, const HyperRect& left,
                                          const HyperRect& right) {
  TreeNode& parent = node(id);
  if (!parent.is_leaf())
    throw std::logic_error("attach_children: node already internal");
  int l = int(nodes_.size()), r = l + 1;
  TreeNode ln, rn;
  ln.id = l;
  rn.id = r;
  ln.parent = rn.parent = id;
  ln.depth = rn.depth = parent.depth + 1;
  ln.rect = left;
  rn.rect = right;
  nodes_.push_back(std::move(ln));
  nodes_.push_back(std::move(rn));
  node(id).left = l;
  node(id).right = r;
  return {l, r};
}

double child_preference(const TreeNode& node, double lambda) {
  if (node.is_leaf()) return 0.0;
  double mean_child_depth = node.leaf_depth_sum / double(node.leaf_count);
  double scale = std::pow(lambda, mean_child_depth - double(node.depth));
  double m = double(node.traversals);
  double n = double(node.local_runs());
  if (m <= n) return 0.0;
  return scale * (m - n) / (n + scale * (m - n));
}

void Tree::refresh_leaf_depth(TreeNode& n) {
  if (n.is_leaf()) {
    n.leaf_count = 1;
    n.leaf_depth_sum = double(n.depth);
  } else {
    const TreeNode& l = node(n.left);
    const TreeNode& r = node(n.right);
    n.leaf_count = l.leaf_count + r.leaf_count;
    n.leaf_depth_sum = l.leaf_depth_sum + r.leaf_depth_sum;
  }
}

void Tree::recompute(int id, const PropagationParams& p, double threshold_ref) {
  TreeNode& n = node(id);
  refresh_leaf_depth(n);
  NodeStats& s = n.stats;
  s.c = child_preference(n, p.lambda);

  const std::size_t N = n.local_runs();
  const std::size_t M = n.traversals;

  // local aggregates over the amalgamated log weights
  std::vector<double> log_w(N);
  for (std::size_t i = 0; i < N; ++i) log_w[i] = n.runs[i].amalg_log_w;
  double lsw = log_sum_exp(log_w);
  std::vector<double> log_w2(N);
  for (std::size_t i = 0; i < N; ++i)
    log_w2[i] = log_w[i] == neg_inf ? neg_inf : 2.0 * log_w[i];
  double lsw2 = log_sum_exp(log_w2);
  s.fit = fit_log_weights(log_w);

  const double log_n = N > 0 ? std::log(double(N)) : 0.0;
  const double log_c = s.c > 0.0 ? std::log(s.c) : neg_inf;
  const double log_1mc = s.c < 1.0 ? std::log1p(-s.c) : neg_inf;

  auto combine = [&](double local_log_sum, double child_l, double child_r,
                     bool squared) {
    double local = neg_inf;
    if (N > 0 && local_log_sum != neg_inf && s.c < 1.0) {
      double coeff = squared ? 2.0 * (log_1mc - log_n) : log_1mc - log_n;
      local = coeff + local_log_sum;
    }
    double child = neg_inf;
    if (!n.is_leaf() && s.c > 0.0) {
      double sum = log_add_exp(child_l, child_r);
      if (sum != neg_inf) child = (squared ? 2.0 * log_c : log_c) + sum;
    }
    return log_add_exp(local, child);
  };

  double child_omega_l = neg_inf, child_omega_r = neg_inf;
  double child_xi_l = neg_inf, child_xi_r = neg_inf;
  if (!n.is_leaf()) {
    child_omega_l = node(n.left).stats.log_omega;
    child_omega_r = node(n.right).stats.log_omega;
    child_xi_l = node(n.left).stats.log_xi;
    child_xi_r = node(n.right).stats.log_xi;
  }
  s.log_omega = combine(lsw, child_omega_l, child_omega_r, false);
  s.log_xi = combine(lsw2, child_xi_l, child_xi_r, true);

  // sigma^2 with Bessel correction, clamped at 0; M < 2 is maximally
  // uncertain and ranks first
  if (M < 2) {
    s.log_sigma2 = pos_inf;
  } else {
    double log_zeta2 = std::log(double(M)) + s.log_xi;
    double log_omega2 = s.log_omega == neg_inf ? neg_inf : 2.0 * s.log_omega;
    if (log_zeta2 <= log_omega2) {
      s.log_sigma2 = neg_inf;
    } else {
      s.log_sigma2 = std::log(double(M) / double(M - 1)) +
                     log_sub_exp(log_zeta2, log_omega2);
    }
  }

  s.ess = (s.log_omega == neg_inf || s.log_xi == neg_inf)
              ? 0.0
              : std::exp(2.0 * s.log_omega - s.log_xi);

  // targeted exploration probability
  double th = threshold_ref + n.rect.log_volume();
  double pe = s.fit.valid
                  ? prob_exceed_given_none(s.fit, th, p.log_w_gap, N,
                                           p.lookahead)
                  : 1.0;
  double term = s.ess > 0.0 ? std::min(1.0, pe / s.ess) : 1.0;
  if (n.is_leaf()) {
    s.ps = term;
  } else {
    double pl = node(n.left).stats.ps;
    double pr = node(n.right).stats.ps;
    s.ps = (1.0 - s.c) * term + s.c * (pl + pr - pl * pr);
    s.ps = std::clamp(s.ps, 0.0, 1.0);
  }

  if (p.track_integrand) {
    std::vector<double> log_wf(N), log_wf2(N);
    for (std::size_t i = 0; i < N; ++i) {
      double f = n.runs[i].f_value;
      log_wf[i] = (f <= 0.0 || log_w[i] == neg_inf) ? neg_inf
                                                    : log_w[i] + std::log(f);
      log_wf2[i] = log_wf[i] == neg_inf ? neg_inf : 2.0 * log_wf[i];
    }
    double child_of_l = neg_inf, child_of_r = neg_inf;
    double child_xf_l = neg_inf, child_xf_r = neg_inf;
    if (!n.is_leaf()) {
      child_of_l = node(n.left).stats.log_omega_f;
      child_of_r = node(n.right).stats.log_omega_f;
      child_xf_l = node(n.left).stats.log_xi_f;
      child_xf_r = node(n.right).stats.log_xi_f;
    }
    s.log_omega_f = combine(log_sum_exp(log_wf), child_of_l, child_of_r, false);
    s.log_xi_f = combine(log_sum_exp(log_wf2), child_xf_l, child_xf_r, true);
    if (M < 2) {
      s.log_s2 = pos_inf;
    } else {
      double log_zeta2f = std::log(double(M)) + s.log_xi_f;
      double log_of2 = s.log_omega_f == neg_inf ? neg_inf : 2.0 * s.log_omega_f;
      s.log_s2 = log_zeta2f <= log_of2
                     ? neg_inf
                     : std::log(double(M) / double(M - 1)) +
                           log_sub_exp(log_zeta2f, log_of2);
    }
  } else {
    s.log_omega_f = s.log_xi_f = s.log_s2 = neg_inf;
  }
}

void Tree::propagate_from(int id, const PropagationParams& p,
                          double threshold_ref) {
  for (int j = id; j >= 0; j = node(j).parent) recompute(j, p, threshold_ref);
}

void Tree::recompute_all(const PropagationParams& p, double threshold_ref) {
  // children have larger ids than parents, so a reverse scan is bottom-up
  for (std::size_t i = nodes_.size(); i-- > 0;)
    recompute(int(i), p, threshold_ref);
}

double Tree::max_volume_free_log_w() const {
  double best = neg_inf;
  for (const auto& nd : nodes_) {
    double lv = nd.rect.log_volume();
    for (const auto& run : nd.runs)
      best = std::max(best, run.amalg_log_w - lv);
  }
  return best;
}

void Tree::flatten_node(int id, double log_k, std::vector<WeightedPoint>& out,
                        std::vector<double>& log_w) const {
  const TreeNode& n = node(id);
  const NodeStats& s = n.stats;
  double local_coeff =
      s.c < 1.0 && n.local_runs() > 0
          ? log_k + std::log1p(-s.c) - std::log(double(n.local_runs()))
          : neg_inf;
  for (const auto& run : n.runs) {
    double lc = local_coeff == neg_inf || run.amalg_log_w == neg_inf
                    ? neg_inf
                    : local_coeff + run.amalg_log_w;
    for (const auto& smp : run.samples) {
      out.push_back({smp.x, smp.frac});
      log_w.push_back(lc);
    }
  }
  if (!n.is_leaf() && s.c > 0.0) {
    double child_k = log_k + std::log(s.c);
    flatten_node(n.left, child_k, out, log_w);
    flatten_node(n.right, child_k, out, log_w);
  }
}

double Tree::estimate(
    const std::function<double(const std::vector<double>&)>& f) const {
  std::vector<WeightedPoint> pts;
  std::vector<double> log_w;
  flatten_node(0, 0.0, pts, log_w);
  double shift = log_sum_exp(log_w);
  if (shift == neg_inf)
    throw std::runtime_error("estimate: no posterior mass located");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (log_w[i] == neg_inf) continue;
    double w = std::exp(log_w[i] - shift) * pts[i].weight;
    num += w * f(pts[i].x);
    den += w;
  }
  return num / den;
}

std::vector<WeightedPoint> Tree::flatten_measure() const {
  std::vector<WeightedPoint> pts;
  std::vector<double> log_w;
  flatten_node(0, 0.0, pts, log_w);
  double shift = log_sum_exp(log_w);
  std::vector<WeightedPoint> out;
  if (shift == neg_inf) return out;
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double w = log_w[i] == neg_inf
                   ? 0.0
                   : std::exp(log_w[i] - shift) * pts[i].weight;
    total += w;
    out.push_back({std::move(pts[i].x), w});
  }
  for (auto& p : out) p.weight /= total;
  return out;
}

double Tree::estimate_integral() const {
  // per-run amalgamated integrand values; valid for signed f
  double num = 0.0, den = 0.0;
  std::vector<int> stack{0};
  std::vector<double> kstack{0.0};
  double shift = log_ml();
  if (shift == neg_inf)
    throw std::runtime_error("estimate_integral: no posterior mass located");
  while (!stack.empty()) {
    int id = stack.back();
    double log_k = kstack.back();
    stack.pop_back();
    kstack.pop_back();
    const TreeNode& n = node(id);
    const NodeStats& s = n.stats;
    if (s.c < 1.0 && n.local_runs() > 0) {
      double coeff = log_k + std::log1p(-s.c) - std::log(double(n.local_runs()));
      for (const auto& run : n.runs) {
        if (run.amalg_log_w == neg_inf) continue;
        double w = std::exp(coeff + run.amalg_log_w - shift);
        num += w * run.f_value;
        den += w;
      }
    }
    if (!n.is_leaf() && s.c > 0.0) {
      stack.push_back(n.left);
      kstack.push_back(log_k + std::log(s.c));
      stack.push_back(n.right);
      kstack.push_back(log_k + std::log(s.c));
    }
  }
  return num / den;
}

std::string Tree::to_json() const {
  json doc;
  doc["format"] = "itree-checkpoint";
  doc["version"] = 1;
  doc["dim"] = dim_;
  json nodes = json::array();
  for (const auto& n : nodes_) {
    json jn;
    jn["id"] = n.id;
    jn["parent"] = n.parent;
    jn["left"] = n.left;
    jn["right"] = n.right;
    jn["depth"] = n.depth;
    jn["lo"] = n.rect.lo;
    jn["hi"] = n.rect.hi;
    jn["traversals"] = n.traversals;
    jn["log_omega"] = n.stats.log_omega;
    jn["ess"] = n.stats.ess;
    json runs = json::array();
    for (const auto& r : n.runs) {
      json jr;
      jr["log_w"] = std::isfinite(r.amalg_log_w)
                        ? json(r.amalg_log_w)
                        : json(nullptr);
      jr["rep_z"] = r.rep_z;
      jr["f"] = r.f_value;
      jr["evals"] = r.evals;
      json samples = json::array();
      for (const auto& s : r.samples)
        samples.push_back({{"x", s.x}, {"frac", s.frac}});
      jr["samples"] = std::move(samples);
      runs.push_back(std::move(jr));
    }
    jn["runs"] = std::move(runs);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump();
}

Tree Tree::from_json(const std::string& text) {
  json doc = json::parse(text);
  if (doc.value("format", "") != "itree-checkpoint" || doc.value("version", 0) != 1)
    throw std::runtime_error("tree checkpoint: unknown format or version");
  Tree tree(doc.at("dim").get<std::size_t>());
  tree.nodes_.clear();
  for (const auto& jn : doc.at("nodes")) {
    TreeNode n;
    n.id = jn.at("id").get<int>();
    n.parent = jn.at("parent").get<int>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    n.depth = jn.at("depth").get<int>();
    n.rect = HyperRect(jn.at("lo").get<std::vector<double>>(),
                       jn.at("hi").get<std::vector<double>>());
    n.traversals = jn.at("traversals").get<std::size_t>();
    for (const auto& jr : jn.at("runs")) {
      RunResult r;
      r.amalg_log_w = jr.at("log_w").is_null() ? neg_inf
                                               : jr.at("log_w").get<double>();
      r.rep_z = jr.at("rep_z").get<std::vector<double>>();
      r.f_value = jr.at("f").get<double>();
      r.evals = jr.at("evals").get<std::size_t>();
      for (const auto& js : jr.at("samples"))
        r.samples.push_back({js.at("x").get<std::vector<double>>(),
                             js.at("frac").get<double>()});
      n.runs.push_back(std::move(r));
    }
    tree.nodes_.push_back(std::move(n));
  }
  return tree;
}

}  // namespace itree
