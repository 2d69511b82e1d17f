#include "itree/base_infer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "itree/math.hpp"

namespace itree {

RunResult is_run(const TargetModel& model, const HyperRect& rect,
                 std::size_t batch_size, RngStream& rng) {
  if (batch_size < 1) throw std::invalid_argument("is_run: batch_size < 1");

  std::vector<std::vector<double>> zs(batch_size);
  std::vector<double> log_w(batch_size);
  RunResult out;
  out.samples.resize(batch_size);
  std::vector<double> f_vals(batch_size, 0.0);

  for (std::size_t n = 0; n < batch_size; ++n) {
    zs[n] = sample_in_rect(rect, rng);
    auto tw = truncated_weight(model, rect, zs[n]);
    log_w[n] = tw.log_w;
    out.samples[n].x = std::move(tw.x);
    if (model.has_integrand()) f_vals[n] = model.integrand(out.samples[n].x);
  }

  double lse = log_sum_exp(log_w);
  out.amalg_log_w = lse == neg_inf ? neg_inf
                                   : lse - std::log(double(batch_size));
  out.evals = batch_size;

  // within-run fractions and weight-mean representative z
  out.rep_z.assign(rect.dim(), 0.0);
  if (lse == neg_inf) {
    for (auto& s : out.samples) s.frac = 0.0;
    for (std::size_t n = 0; n < batch_size; ++n)
      for (std::size_t t = 0; t < rect.dim(); ++t)
        out.rep_z[t] += zs[n][t] / double(batch_size);
  } else {
    double fsum = 0.0;
    for (std::size_t n = 0; n < batch_size; ++n) {
      double frac = std::exp(log_w[n] - lse);
      out.samples[n].frac = frac;
      for (std::size_t t = 0; t < rect.dim(); ++t)
        out.rep_z[t] += frac * zs[n][t];
      if (model.has_integrand()) fsum += frac * f_vals[n];
    }
    out.f_value = fsum;  // = sum(w f)/sum(w)
  }
  return out;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights,
                                             std::size_t n, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("systematic_resample: negative weight");
    total += w;
  }
  if (total <= 0.0)
    throw std::invalid_argument("systematic_resample: all weights zero");

  std::vector<std::size_t> idx(n);
  double u = rng.uniform() / double(n);
  double cum = weights[0] / total;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double pos = u + double(i) / double(n);
    while (pos > cum && j + 1 < weights.size()) {
      ++j;
      cum += weights[j] / total;
    }
    idx[i] = j;
  }
  return idx;
}

RunResult smc_sweep(const SsmModel& model, const HyperRect& theta_rect,
                    std::size_t n_particles, RngStream& rng) {
  if (n_particles < 2) throw std::invalid_argument("smc_sweep: n_particles < 2");

  RunResult out;
  out.rep_z = sample_in_rect(theta_rect, rng);
  std::vector<double> theta = model.to_theta(out.rep_z);

  double log_ml = pf_log_ml(model, theta, n_particles, rng);
  out.amalg_log_w = log_ml == neg_inf ? neg_inf
                                      : log_ml + theta_rect.log_volume();
  out.evals = n_particles * model.series_length();
  out.samples.push_back({theta, 1.0});
  return out;
}

double pf_log_ml(const SsmModel& model, const std::vector<double>& theta,
                 std::size_t n_particles, RngStream& rng) {
  const std::size_t T = model.series_length();
  std::vector<std::vector<double>> particles(n_particles);
  for (auto& p : particles) p = model.init_state(rng);

  double log_ml = 0.0;
  std::vector<double> log_w(n_particles), w(n_particles);
  std::vector<std::vector<double>> next(n_particles);

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n_particles; ++i) {
      particles[i] = model.transition(theta, particles[i], rng);
      log_w[i] = model.log_obs(theta, particles[i], t);
    }
    double lse = log_sum_exp(log_w);
    if (lse == neg_inf) return neg_inf;  // filter died
    log_ml += lse - std::log(double(n_particles));

    for (std::size_t i = 0; i < n_particles; ++i)
      w[i] = std::exp(log_w[i] - lse);
    auto idx = systematic_resample(w, n_particles, rng);
    for (std::size_t i = 0; i < n_particles; ++i) next[i] = particles[idx[i]];
    particles.swap(next);
  }
  return log_ml;
}

}  // namespace itree
