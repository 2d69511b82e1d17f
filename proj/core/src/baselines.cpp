#include "itree/baselines.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "itree/math.hpp"

namespace itree {

VanillaIsResult vanilla_is(const TargetModel& model, std::size_t budget,
                           RngStream& rng) {
  if (budget < 1) throw std::invalid_argument("vanilla_is: budget < 1");
  const HyperRect cube = HyperRect::unit(model.dim());
  VanillaIsResult out;
  out.evals = budget;
  std::vector<double> log_w(budget);
  std::vector<std::vector<double>> xs(budget);
  for (std::size_t i = 0; i < budget; ++i) {
    auto z = sample_in_rect(cube, rng);
    auto tw = truncated_weight(model, cube, z);
    xs[i] = std::move(tw.x);
    log_w[i] = tw.log_w;
  }
  double lse = log_sum_exp(log_w);
  out.log_ml = lse - std::log(double(budget));
  if (lse == neg_inf) {
    out.ess = 0.0;
    return out;
  }
  std::vector<double> log_w2(budget);
  for (std::size_t i = 0; i < budget; ++i)
    log_w2[i] = log_w[i] == neg_inf ? neg_inf : 2.0 * log_w[i];
  out.ess = std::exp(2.0 * lse - log_sum_exp(log_w2));
  out.measure.reserve(budget);
  for (std::size_t i = 0; i < budget; ++i)
    out.measure.push_back({std::move(xs[i]), std::exp(log_w[i] - lse)});
  return out;
}

double vanilla_is_integral(const TargetModel& model, std::size_t budget,
                           RngStream& rng) {
  auto res = vanilla_is(model, budget, rng);
  double acc = 0.0;
  for (const auto& p : res.measure)
    if (p.weight > 0.0) acc += p.weight * model.integrand(p.x);
  return acc;
}

TraversalParams naive_it_preset() {
  TraversalParams p;
  p.delta_schedule = [](double) { return 0.0; };
  p.alpha_schedule = [](double) { return 0.0; };
  p.beta = 0.5;
  p.beta_cutoff = 1.0 + 1e-12;  // the boost is this preset's only exploration
  return p;
}

PmmhState pmmh_init(const SsmModel& model, std::size_t n_particles,
                    RngStream& rng) {
  PmmhState st;
  st.n_particles = n_particles;
  std::vector<double> z(model.theta_dim());
  for (auto& v : z) v = rng.uniform();
  st.theta = model.to_theta(z);  // proposal equals prior
  st.log_z = pf_log_ml(model, st.theta, n_particles, rng);
  return st;
}

void pmmh_step(const SsmModel& model, PmmhState& state, RngStream& rng) {
  std::vector<double> prop(state.theta.size());
  for (std::size_t i = 0; i < prop.size(); ++i)
    prop[i] = state.theta[i] + state.step_sd * rng.normal();

  bool accepted = false;
  double lp_prop = model.log_prior(prop);
  if (lp_prop > neg_inf) {
    double lz_prop = pf_log_ml(model, prop, state.n_particles, rng);
    if (lz_prop > neg_inf) {
      double lp_cur = model.log_prior(state.theta);
      double log_ratio = lz_prop + lp_prop - state.log_z - lp_cur;
      if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio)
        accepted = true;
      if (accepted) {
        state.theta = std::move(prop);
        state.log_z = lz_prop;
      }
    }
  }
  if (accepted) ++state.accepted;
  state.trace.push_back(
      {state.trace.size(), state.theta, state.log_z, accepted});
}

void write_pmmh_trace_csv(const PmmhState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  out << "iteration";
  for (std::size_t i = 0; i < state.theta.size(); ++i) out << ",theta" << i;
  out << ",log_z,accepted\n";
  for (const auto& row : state.trace) {
    out << row.iteration;
    for (double t : row.theta) out << "," << t;
    out << "," << row.log_z << "," << (row.accepted ? 1 : 0) << "\n";
  }
}

}  // namespace itree
