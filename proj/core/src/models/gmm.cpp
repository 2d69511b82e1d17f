#include "itree/models/gmm.hpp"

#include <cmath>

#include <json.hpp>

#include "itree/math.hpp"
#include "itree/models/dataset_io.hpp"
#include "itree/rng.hpp"

namespace itree::models {

GmmModel::GmmModel(GmmConfig cfg, std::vector<std::vector<double>> data)
    : cfg_(cfg), data_(std::move(data)) {
  for (const auto& y : data_)
    if (y.size() != cfg_.data_dim)
      throw std::invalid_argument("GmmModel: data dimension mismatch");
}

std::vector<double> GmmModel::to_params(const std::vector<double>& z) const {
  std::vector<double> mu(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    mu[i] = cfg_.prior_sd * norm_ppf(z[i]);
  return mu;
}

double GmmModel::log_ratio(const std::vector<double>& mu) const {
  // proposal is the prior, so the ratio is the marginalized likelihood
  const std::size_t K = cfg_.components, D = cfg_.data_dim;
  const double log_k = std::log(double(K));
  double total = 0.0;
  std::vector<double> comp(K);
  for (const auto& y : data_) {
    for (std::size_t k = 0; k < K; ++k) {
      double lp = 0.0;
      for (std::size_t d = 0; d < D; ++d)
        lp += norm_log_pdf(y[d], mu[k * D + d], cfg_.obs_sd);
      comp[k] = lp;
    }
    total += log_sum_exp(comp) - log_k;
  }
  return total;
}

double GmmModel::log_gamma(const std::vector<double>& mu) const {
  double lp = 0.0;
  for (double m : mu) lp += norm_log_pdf(m, 0.0, cfg_.prior_sd);
  return lp + log_ratio(mu);
}

GmmDataset generate_gmm_synthetic(const GmmConfig& cfg, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, 0x67, 0x6d, 0x6d);
  GmmDataset ds;
  ds.cfg = cfg;
  ds.seed = seed;
  ds.true_means.resize(cfg.components);
  for (auto& mu : ds.true_means) {
    mu.resize(cfg.data_dim);
    for (auto& v : mu) v = cfg.prior_sd * rng.normal();
  }
  ds.observations.resize(cfg.n_data);
  for (auto& y : ds.observations) {
    std::size_t k = rng.index(cfg.components);
    y.resize(cfg.data_dim);
    for (std::size_t d = 0; d < cfg.data_dim; ++d)
      y[d] = ds.true_means[k][d] + cfg.obs_sd * rng.normal();
  }
  return ds;
}

void GmmDataset::save(const std::string& dir) const {
  std::vector<std::string> header(cfg.data_dim);
  for (std::size_t d = 0; d < cfg.data_dim; ++d)
    header[d] = "y" + std::to_string(d);
  write_matrix_csv(dir + "/gmm_data.csv", header, observations);

  nlohmann::json meta;
  meta["model"] = "gmm";
  meta["seed"] = seed;
  meta["components"] = cfg.components;
  meta["data_dim"] = cfg.data_dim;
  meta["n_data"] = cfg.n_data;
  meta["prior_sd"] = cfg.prior_sd;
  meta["obs_sd"] = cfg.obs_sd;
  meta["true_means"] = true_means;
  write_text(dir + "/gmm_data.json", meta.dump(2));
}

}  // namespace itree::models
