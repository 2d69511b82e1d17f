#include "itree/models/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <json.hpp>

#include "itree/math.hpp"
#include "itree/models/dataset_io.hpp"
#include "itree/rng.hpp"

namespace itree::models {

NetworkGraph NetworkGraph::layered_default() {
  // source = 0, sink = 11; vertices 1..5 and 6..10 form the two chains
  NetworkGraph g;
  g.n_vertices = 12;
  g.source = 0;
  g.sink = 11;
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4},  {4, 11},
             {0, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 11}};
  return g;
}

NetworkGraph NetworkGraph::single_edge() {
  NetworkGraph g;
  g.n_vertices = 2;
  g.source = 0;
  g.sink = 1;
  g.edges = {{0, 1}};
  return g;
}

double shortest_path_length(const NetworkGraph& graph,
                            const std::vector<double>& weights) {
  if (weights.size() != graph.n_edges())
    throw std::invalid_argument("shortest_path_length: weight count mismatch");
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(graph.n_vertices);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    auto [u, v] = graph.edges[e];
    double w = std::max(0.0, weights[e]);
    adj[u].emplace_back(v, w);
    adj[v].emplace_back(u, w);
  }
  std::vector<double> dist(graph.n_vertices, pos_inf);
  dist[graph.source] = 0.0;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.emplace(0.0, graph.source);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == graph.sink) return d;
    for (auto [v, w] : adj[u]) {
      double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist[graph.sink];
}

NetworkModel::NetworkModel(NetworkConfig cfg, NetworkGraph graph,
                           std::vector<double> observations)
    : cfg_(cfg), graph_(std::move(graph)), obs_(std::move(observations)) {
  if (obs_.size() != graph_.n_edges())
    throw std::invalid_argument("NetworkModel: observation count mismatch");
}

std::vector<double> NetworkModel::to_params(const std::vector<double>& z) const {
  std::vector<double> w(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    w[i] = cfg_.prior_mean + cfg_.prior_sd * norm_ppf(z[i]);
  return w;
}

double NetworkModel::log_ratio(const std::vector<double>& w) const {
  // proposal is the prior, so only the observation likelihood remains
  double lp = 0.0;
  for (std::size_t e = 0; e < obs_.size(); ++e) {
    double u = (obs_[e] - w[e]) / cfg_.obs_scale;
    lp += student_t_log_pdf(u, cfg_.obs_dof) - std::log(cfg_.obs_scale);
  }
  return lp;
}

double NetworkModel::integrand(const std::vector<double>& w) const {
  return shortest_path_length(graph_, w) > cfg_.threshold ? 1.0 : 0.0;
}

NetworkDataset generate_network_synthetic(const NetworkConfig& cfg,
                                          std::size_t n_edges,
                                          std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, 0x6e, 0x65, 0x74);
  NetworkDataset ds;
  ds.cfg = cfg;
  ds.seed = seed;
  ds.true_weights.resize(n_edges);
  ds.observations.resize(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    ds.true_weights[e] = cfg.prior_mean + cfg.prior_sd * rng.normal();
    // Student-T noise via normal / sqrt(chi^2 / nu)
    double z = rng.normal();
    double chi2 = 2.0 * rng.gamma(cfg.obs_dof / 2.0);
    ds.observations[e] =
        ds.true_weights[e] + cfg.obs_scale * z / std::sqrt(chi2 / cfg.obs_dof);
  }
  return ds;
}

void NetworkDataset::save(const std::string& dir) const {
  std::vector<std::vector<double>> rows(true_weights.size());
  for (std::size_t e = 0; e < true_weights.size(); ++e)
    rows[e] = {true_weights[e], observations[e]};
  write_matrix_csv(dir + "/network_data.csv", {"true_weight", "observation"},
                   rows);

  nlohmann::json meta;
  meta["model"] = "network";
  meta["seed"] = seed;
  meta["prior_mean"] = cfg.prior_mean;
  meta["prior_sd"] = cfg.prior_sd;
  meta["obs_scale"] = cfg.obs_scale;
  meta["obs_dof"] = cfg.obs_dof;
  meta["threshold"] = cfg.threshold;
  write_text(dir + "/network_data.json", meta.dump(2));
}

}  // namespace itree::models
