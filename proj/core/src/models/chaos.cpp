#include "itree/models/chaos.hpp"

#include <cmath>

#include <json.hpp>

#include "itree/math.hpp"
#include "itree/models/dataset_io.hpp"

namespace itree::models {

std::array<double, 3> pickover_step(const std::array<double, 4>& theta,
                                    const std::array<double, 3>& x) {
  const double a = theta[0], b = theta[1], c = theta[2], d = theta[3];
  return {std::sin(b * x[1]) - std::cos(a * x[0]) * x[2],
          std::sin(d * x[0]) * x[2] - std::cos(c * x[1]),
          std::sin(x[0])};
}

ChaosModel::ChaosModel(ChaosConfig cfg,
                       std::vector<std::vector<double>> obs_matrix,
                       std::vector<std::vector<double>> data)
    : cfg_(cfg), obs_matrix_(std::move(obs_matrix)), data_(std::move(data)) {
  if (obs_matrix_.size() != cfg_.obs_dim)
    throw std::invalid_argument("ChaosModel: observation matrix rows != K");
  if (data_.size() != cfg_.series_length)
    throw std::invalid_argument("ChaosModel: data length mismatch");
}

std::vector<double> ChaosModel::to_theta(const std::vector<double>& z) const {
  std::vector<double> theta(4);
  for (std::size_t i = 0; i < 4; ++i) theta[i] = -M_PI + 2.0 * M_PI * z[i];
  return theta;
}

double ChaosModel::log_prior(const std::vector<double>& theta) const {
  for (double t : theta)
    if (t < -M_PI || t > M_PI) return neg_inf;
  return -4.0 * std::log(2.0 * M_PI);
}

std::vector<double> ChaosModel::init_state(RngStream& rng) const {
  return {rng.normal(), rng.normal(), rng.normal()};
}

std::vector<double> ChaosModel::transition(const std::vector<double>& theta,
                                           const std::vector<double>& x_prev,
                                           RngStream& rng) const {
  auto mean = pickover_step({theta[0], theta[1], theta[2], theta[3]},
                            {x_prev[0], x_prev[1], x_prev[2]});
  return {mean[0] + cfg_.trans_sd * rng.normal(),
          mean[1] + cfg_.trans_sd * rng.normal(),
          mean[2] + cfg_.trans_sd * rng.normal()};
}

double ChaosModel::log_obs(const std::vector<double>&,
                           const std::vector<double>& x,
                           std::size_t t) const {
  double lp = 0.0;
  for (std::size_t k = 0; k < cfg_.obs_dim; ++k) {
    double mean = obs_matrix_[k][0] * x[0] + obs_matrix_[k][1] * x[1] +
                  obs_matrix_[k][2] * x[2];
    lp += norm_log_pdf(data_[t][k], mean, cfg_.obs_sd);
  }
  return lp;
}

ChaosDataset generate_chaos_synthetic(const ChaosConfig& cfg,
                                      std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, 0x63, 0x68, 0x73);
  ChaosDataset ds;
  ds.cfg = cfg;
  ds.seed = seed;
  ds.true_theta = {2.5, -2.3, 1.25, -1.5};

  // columns are Dirichlet(0.1) over the K rows
  ds.obs_matrix.assign(cfg.obs_dim, std::vector<double>(3, 0.0));
  for (std::size_t col = 0; col < 3; ++col) {
    double total = 0.0;
    std::vector<double> g(cfg.obs_dim);
    for (auto& v : g) {
      v = rng.gamma(0.1);
      total += v;
    }
    for (std::size_t k = 0; k < cfg.obs_dim; ++k)
      ds.obs_matrix[k][col] = g[k] / total;
  }

  std::array<double, 3> x{rng.normal(), rng.normal(), rng.normal()};
  ds.observations.resize(cfg.series_length);
  for (std::size_t t = 0; t < cfg.series_length; ++t) {
    auto mean = pickover_step(ds.true_theta, x);
    for (std::size_t i = 0; i < 3; ++i)
      x[i] = mean[i] + cfg.trans_sd * rng.normal();
    ds.observations[t].resize(cfg.obs_dim);
    for (std::size_t k = 0; k < cfg.obs_dim; ++k) {
      double m = ds.obs_matrix[k][0] * x[0] + ds.obs_matrix[k][1] * x[1] +
                 ds.obs_matrix[k][2] * x[2];
      ds.observations[t][k] = m + cfg.obs_sd * rng.normal();
    }
  }
  return ds;
}

void ChaosDataset::save(const std::string& dir) const {
  std::vector<std::string> header(cfg.obs_dim);
  for (std::size_t k = 0; k < cfg.obs_dim; ++k)
    header[k] = "y" + std::to_string(k);
  write_matrix_csv(dir + "/chaos_data.csv", header, observations);

  nlohmann::json meta;
  meta["model"] = "chaos";
  meta["seed"] = seed;
  meta["series_length"] = cfg.series_length;
  meta["obs_dim"] = cfg.obs_dim;
  meta["trans_sd"] = cfg.trans_sd;
  meta["obs_sd"] = cfg.obs_sd;
  meta["true_theta"] = true_theta;
  meta["obs_matrix"] = obs_matrix;
  write_text(dir + "/chaos_data.json", meta.dump(2));
}

}  // namespace itree::models
