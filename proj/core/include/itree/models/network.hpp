#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "itree/model.hpp"

namespace itree::models {

struct NetworkGraph {
  std::size_t n_vertices = 0;
  std::size_t source = 0;
  std::size_t sink = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t n_edges() const { return edges.size(); }

  // Two parallel chains of 5 edges from source to sink (10 edges).
  static NetworkGraph layered_default();
  // Single source->sink edge.
  static NetworkGraph single_edge();
};

// Dijkstra shortest source->sink length; negative edge weights are clamped
// at 0 inside the path computation only.
double shortest_path_length(const NetworkGraph& graph,
                            const std::vector<double>& weights);

struct NetworkConfig {
  double prior_mean = 3.0;
  double prior_sd = 1.0;
  double obs_scale = 0.1;  // sigma
  double obs_dof = 5.0;    // nu
  double threshold = 3.8;
};

// Edge weights with Gaussian prior, Student-T observation noise, and the
// indicator integrand 1(shortest path > threshold).
class NetworkModel final : public TargetModel {
 public:
  NetworkModel(NetworkConfig cfg, NetworkGraph graph,
               std::vector<double> observations);

  std::size_t dim() const override { return graph_.n_edges(); }
  std::vector<double> to_params(const std::vector<double>& z) const override;
  double log_ratio(const std::vector<double>& x) const override;

  bool has_integrand() const override { return true; }
  double integrand(const std::vector<double>& x) const override;

  const NetworkGraph& graph() const { return graph_; }
  const NetworkConfig& config() const { return cfg_; }
  const std::vector<double>& observations() const { return obs_; }

 private:
  NetworkConfig cfg_;
  NetworkGraph graph_;
  std::vector<double> obs_;
};

struct NetworkDataset {
  NetworkConfig cfg;
  std::uint64_t seed = 0;
  std::vector<double> true_weights;
  std::vector<double> observations;

  void save(const std::string& dir) const;
};

NetworkDataset generate_network_synthetic(const NetworkConfig& cfg,
                                          std::size_t n_edges,
                                          std::uint64_t seed);

}  // namespace itree::models
