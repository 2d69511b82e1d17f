#include "itree/engine.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "itree/baselines.hpp"
#include "itree/math.hpp"
#include "itree/models/chaos.hpp"
#include "itree/models/gmm.hpp"
#include "itree/models/network.hpp"
#include "itree/models/toy.hpp"

namespace itree {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

template <typename T>
T parse_num(const std::string& v, const std::string& key) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (in.fail()) throw std::invalid_argument("config: bad value for " + key + ": " + v);
  return out;
}

}  // namespace

std::string RunConfig::resolved_base_kind() const {
  if (!base_kind.empty()) return base_kind;
  return experiment == "chaos" ? "smc" : "is";
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || section.empty())
      throw std::invalid_argument("config: key outside a [section]: " + line);
    cfg.raw[section + "." + key] = val;
  }

  for (const auto& [k, v] : cfg.raw) {
    if (k == "run.experiment") cfg.experiment = v;
    else if (k == "run.algorithm") cfg.algorithm = v;
    else if (k == "run.seed") cfg.seed = parse_num<std::uint64_t>(v, k);
    else if (k == "run.budget") cfg.budget = parse_num<std::size_t>(v, k);
    else if (k == "run.trace_cadence") cfg.trace_cadence = parse_num<std::size_t>(v, k);
    else if (k == "run.out") cfg.out_dir = v;
    else if (k == "run.integration") cfg.integration = parse_bool(v, k);
    else if (k == "base.kind") cfg.base_kind = v;
    else if (k == "base.batch_size") cfg.batch_size = parse_num<std::size_t>(v, k);
    else if (k == "base.particles") cfg.particles = parse_num<std::size_t>(v, k);
    else if (k == "traversal.kappa") cfg.traversal.kappa = parse_num<double>(v, k);
    else if (k == "traversal.beta") cfg.traversal.beta = parse_num<double>(v, k);
    else if (k == "traversal.lambda") cfg.traversal.lambda = parse_num<double>(v, k);
    else if (k == "traversal.beta_cutoff") cfg.traversal.beta_cutoff = parse_num<double>(v, k);
    else if (k == "traversal.lookahead") cfg.traversal.lookahead = parse_num<std::size_t>(v, k);
    else if (k == "traversal.log_w_gap") cfg.traversal.log_w_gap = parse_num<double>(v, k);
    else if (k == "traversal.schedules") cfg.schedule_preset = v;
    else if (k == "refine.min_runs") cfg.refine.min_runs = parse_num<std::size_t>(v, k);
    else if (k == "refine.max_ess_ratio") cfg.refine.max_ess_ratio = parse_num<double>(v, k);
    else if (k == "refine.sig_level") cfg.refine.sig_level = parse_num<double>(v, k);
    else if (k == "refine.n_candidates") cfg.refine.n_candidates = parse_num<std::size_t>(v, k);
    else if (k == "refine.runs_per_refinement") cfg.refine.runs_per_refinement = parse_num<std::size_t>(v, k);
    else if (k == "model.data_seed") cfg.data_seed = parse_num<std::uint64_t>(v, k);
    else if (k == "model.toy_y") cfg.toy_y = parse_num<double>(v, k);
    else if (k == "model.toy_obs_sd") cfg.toy_obs_sd = parse_num<double>(v, k);
    else if (k == "model.toy_prior_sd") cfg.toy_prior_sd = parse_num<double>(v, k);
    else if (k == "model.gmm_components") cfg.gmm_components = parse_num<std::size_t>(v, k);
    else if (k == "model.gmm_data_dim") cfg.gmm_data_dim = parse_num<std::size_t>(v, k);
    else if (k == "model.gmm_n_data") cfg.gmm_n_data = parse_num<std::size_t>(v, k);
    else if (k == "model.chaos_series_length") cfg.chaos_series_length = parse_num<std::size_t>(v, k);
    else if (k == "model.chaos_obs_dim") cfg.chaos_obs_dim = parse_num<std::size_t>(v, k);
    else throw std::invalid_argument("config: unknown key " + k);
  }

  if (cfg.budget == 0) throw std::invalid_argument("config: budget must be > 0");
  if (cfg.trace_cadence == 0)
    throw std::invalid_argument("config: trace_cadence must be > 0");
  if (!cfg.raw.count("run.integration") &&
      cfg.experiment.rfind("network", 0) == 0)
    cfg.integration = true;  // known-f traversal is the point of these models
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string RunConfig::echo_json() const {
  json doc;
  doc["run"] = {{"experiment", experiment}, {"algorithm", algorithm},
                {"seed", seed},             {"budget", budget},
                {"trace_cadence", trace_cadence}, {"out", out_dir},
                {"integration", integration}};
  doc["base"] = {{"kind", resolved_base_kind()},
                 {"batch_size", batch_size},
                 {"particles", particles}};
  doc["traversal"] = {{"kappa", traversal.kappa},
                      {"beta", traversal.beta},
                      {"lambda", traversal.lambda},
                      {"beta_cutoff", traversal.beta_cutoff},
                      {"lookahead", traversal.lookahead},
                      {"log_w_gap", traversal.log_w_gap},
                      {"schedules", schedule_preset}};
  doc["refine"] = {{"min_runs", refine.min_runs},
                   {"max_ess_ratio", refine.max_ess_ratio},
                   {"sig_level", refine.sig_level},
                   {"n_candidates", refine.n_candidates},
                   {"runs_per_refinement", refine.runs_per_refinement}};
  doc["model"] = {{"data_seed", data_seed},
                  {"toy_y", toy_y},
                  {"toy_obs_sd", toy_obs_sd},
                  {"toy_prior_sd", toy_prior_sd},
                  {"gmm_components", gmm_components},
                  {"gmm_data_dim", gmm_data_dim},
                  {"gmm_n_data", gmm_n_data},
                  {"chaos_series_length", chaos_series_length},
                  {"chaos_obs_dim", chaos_obs_dim}};
  return doc.dump(2);
}

namespace {

RunConfig config_from_echo(const json& doc) {
  RunConfig cfg;
  const json& r = doc.at("run");
  cfg.experiment = r.at("experiment").get<std::string>();
  cfg.algorithm = r.at("algorithm").get<std::string>();
  cfg.seed = r.at("seed").get<std::uint64_t>();
  cfg.budget = r.at("budget").get<std::size_t>();
  cfg.trace_cadence = r.at("trace_cadence").get<std::size_t>();
  cfg.out_dir = r.at("out").get<std::string>();
  cfg.integration = r.at("integration").get<bool>();
  const json& b = doc.at("base");
  cfg.base_kind = b.at("kind").get<std::string>();
  cfg.batch_size = b.at("batch_size").get<std::size_t>();
  cfg.particles = b.at("particles").get<std::size_t>();
  const json& t = doc.at("traversal");
  cfg.traversal.kappa = t.at("kappa").get<double>();
  cfg.traversal.beta = t.at("beta").get<double>();
  cfg.traversal.lambda = t.at("lambda").get<double>();
  cfg.traversal.beta_cutoff = t.at("beta_cutoff").get<double>();
  cfg.traversal.lookahead = t.at("lookahead").get<std::size_t>();
  cfg.traversal.log_w_gap = t.at("log_w_gap").get<double>();
  cfg.schedule_preset = t.at("schedules").get<std::string>();
  const json& rf = doc.at("refine");
  cfg.refine.min_runs = rf.at("min_runs").get<std::size_t>();
  cfg.refine.max_ess_ratio = rf.at("max_ess_ratio").get<double>();
  cfg.refine.sig_level = rf.at("sig_level").get<double>();
  cfg.refine.n_candidates = rf.at("n_candidates").get<std::size_t>();
  cfg.refine.runs_per_refinement = rf.at("runs_per_refinement").get<std::size_t>();
  const json& m = doc.at("model");
  cfg.data_seed = m.at("data_seed").get<std::uint64_t>();
  cfg.toy_y = m.at("toy_y").get<double>();
  cfg.toy_obs_sd = m.at("toy_obs_sd").get<double>();
  cfg.toy_prior_sd = m.at("toy_prior_sd").get<double>();
  cfg.gmm_components = m.at("gmm_components").get<std::size_t>();
  cfg.gmm_data_dim = m.at("gmm_data_dim").get<std::size_t>();
  cfg.gmm_n_data = m.at("gmm_n_data").get<std::size_t>();
  cfg.chaos_series_length = m.at("chaos_series_length").get<std::size_t>();
  cfg.chaos_obs_dim = m.at("chaos_obs_dim").get<std::size_t>();
  return cfg;
}

TraversalParams resolve_traversal(const RunConfig& cfg) {
  if (cfg.algorithm == "naive_it") return naive_it_preset();
  TraversalParams tp = cfg.traversal;
  std::string preset = cfg.schedule_preset;
  if (preset.empty())
    preset = (cfg.experiment == "gmm" || cfg.experiment == "chaos")
                 ? cfg.experiment
                 : "none";
  if (preset != "none") {
    auto [d, a] = default_schedules(preset);
    tp.delta_schedule = std::move(d);
    tp.alpha_schedule = std::move(a);
  }
  return tp;
}

}  // namespace

ModelBundle build_model(const RunConfig& cfg) {
  ModelBundle mb;
  if (cfg.experiment == "toy") {
    mb.target = std::make_unique<models::ConjugateGaussian1D>(
        cfg.toy_y, cfg.toy_obs_sd, cfg.toy_prior_sd);
  } else if (cfg.experiment == "gmm") {
    models::GmmConfig gc;
    gc.components = cfg.gmm_components;
    gc.data_dim = cfg.gmm_data_dim;
    gc.n_data = cfg.gmm_n_data;
    auto ds = models::generate_gmm_synthetic(gc, cfg.data_seed);
    mb.target = std::make_unique<models::GmmModel>(gc, ds.observations);
  } else if (cfg.experiment == "chaos") {
    models::ChaosConfig cc;
    cc.series_length = cfg.chaos_series_length;
    cc.obs_dim = cfg.chaos_obs_dim;
    auto ds = models::generate_chaos_synthetic(cc, cfg.data_seed);
    mb.ssm = std::make_unique<models::ChaosModel>(cc, ds.obs_matrix,
                                                  ds.observations);
  } else if (cfg.experiment == "network") {
    models::NetworkConfig nc;
    auto graph = models::NetworkGraph::layered_default();
    auto ds = models::generate_network_synthetic(nc, graph.n_edges(),
                                                 cfg.data_seed);
    mb.target = std::make_unique<models::NetworkModel>(nc, std::move(graph),
                                                       ds.observations);
  } else if (cfg.experiment == "network_single") {
    models::NetworkConfig nc;
    auto graph = models::NetworkGraph::single_edge();
    // near-noiseless observation pinned at the prior mean
    mb.target = std::make_unique<models::NetworkModel>(
        nc, std::move(graph), std::vector<double>{nc.prior_mean});
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }
  if (cfg.resolved_base_kind() == "smc") {
    if (!mb.ssm)
      throw std::invalid_argument("smc base requires a state-space experiment");
    mb.dim = mb.ssm->theta_dim();
  } else {
    if (!mb.target)
      throw std::invalid_argument(cfg.experiment + " requires the smc base");
    mb.dim = mb.target->dim();
  }
  return mb;
}

void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  out << "evals_used,iteration,log_ml_estimate,ess,n_leaves,max_depth\n";
  for (const auto& r : trace)
    out << r.evals_used << "," << r.iteration << "," << r.log_ml_estimate
        << "," << r.ess << "," << r.n_leaves << "," << r.max_depth << "\n";
}

namespace {

void append_trace_csv(const std::vector<TraceRow>& trace,
                      const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  for (const auto& r : trace)
    out << r.evals_used << "," << r.iteration << "," << r.log_ml_estimate
        << "," << r.ess << "," << r.n_leaves << "," << r.max_depth << "\n";
}

void write_measure_jsonl(const std::vector<WeightedPoint>& measure,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& p : measure) {
    json rec = {{"x", p.x}, {"weight", p.weight}};
    out << rec.dump() << "\n";
  }
}

void write_checkpoint(const Tree& tree, std::size_t iteration,
                      std::size_t evals_used, double threshold_ref,
                      const std::string& path) {
  json doc;
  doc["format"] = "itree-run-checkpoint";
  doc["version"] = 1;
  doc["iteration"] = iteration;
  doc["evals_used"] = evals_used;
  doc["threshold_ref"] = std::isfinite(threshold_ref) ? json(threshold_ref)
                                                      : json(nullptr);
  doc["tree"] = json::parse(tree.to_json());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump();
}

struct TreeLoopSeed {
  std::unique_ptr<Tree> tree;
  std::size_t iteration = 0;
  std::size_t evals_used = 0;
  double threshold_ref = neg_inf;
};

RunArtifacts tree_loop(const RunConfig& cfg, const ModelBundle& model,
                       TreeLoopSeed seed_state) {
  const bool smc = cfg.resolved_base_kind() == "smc";
  const bool integ = cfg.integration;
  if (integ && (!model.target || !model.target->has_integrand()))
    throw std::invalid_argument("integration traversal needs a known integrand");

  TraversalParams tp = resolve_traversal(cfg);
  PropagationParams pp = tp.propagation();
  pp.track_integrand = model.target && model.target->has_integrand();
  IntegrationParams ip;
  ip.beta = tp.beta;
  ip.lambda = tp.lambda;
  ip.alpha_schedule = tp.alpha_schedule;
  ip.beta_cutoff = tp.beta_cutoff;

  Tree tree = seed_state.tree ? std::move(*seed_state.tree) : Tree(model.dim);
  GlobalThreshold thr{seed_state.threshold_ref};
  std::size_t iteration = seed_state.iteration;
  std::size_t evals_used = seed_state.evals_used;
  tree.recompute_all(pp, thr.ref);

  RunArtifacts art;
  auto trace_now = [&]() {
    art.trace.push_back({evals_used, iteration, tree.log_ml(), tree.root_ess(),
                         tree.n_leaves(), tree.max_depth()});
  };

  try {
    while (evals_used < cfg.budget) {
      double rho = double(evals_used) / double(cfg.budget);
      RngStream tie_rng = RngStream::derive(cfg.seed, iteration + 1, 0, 2);
      std::vector<int> path =
          integ ? select_leaf_integration(tree, ip, rho, tie_rng)
                : select_leaf(tree, tp, rho, tie_rng);
      int leaf = path.back();

      auto base = [&](const HyperRect& rect, std::size_t run_index) {
        RngStream rs = RngStream::derive(cfg.seed, iteration + 1,
                                         run_index + 1, 1);
        return smc ? smc_sweep(*model.ssm, rect, cfg.particles, rs)
                   : is_run(*model.target, rect, cfg.batch_size, rs);
      };
      RngStream cand_rng = RngStream::derive(cfg.seed, iteration + 1, 0, 3);
      RefineOutcome oc = refine(tree, leaf, base, cfg.refine, cand_rng);
      evals_used += oc.evals;

      // any new run may raise the volume-free weight ceiling, which makes
      // every exploration probability stale
      bool moved = false;
      auto scan_new = [&](int id, std::size_t count) {
        const TreeNode& nd = tree.node(id);
        double lv = nd.rect.log_volume();
        for (std::size_t i = nd.runs.size() - count; i < nd.runs.size(); ++i)
          moved |= thr.update(nd.runs[i].amalg_log_w, lv);
      };
      if (oc.action == RefineAction::Split) {
        const TreeNode& ln = tree.node(leaf);
        scan_new(ln.left, tree.node(ln.left).runs.size());
        scan_new(ln.right, tree.node(ln.right).runs.size());
      } else {
        scan_new(leaf, oc.runs_added);
      }

      if (moved) {
        tree.recompute_all(pp, thr.ref);
      } else if (oc.action == RefineAction::Split) {
        tree.recompute(tree.node(leaf).left, pp, thr.ref);
        tree.recompute(tree.node(leaf).right, pp, thr.ref);
        tree.propagate_from(leaf, pp, thr.ref);
      } else {
        tree.propagate_from(leaf, pp, thr.ref);
      }

      ++iteration;
      if (iteration % cfg.trace_cadence == 0 || evals_used >= cfg.budget)
        trace_now();
    }
  } catch (const std::exception&) {
    if (!cfg.out_dir.empty()) {
      fs::create_directories(cfg.out_dir);
      write_checkpoint(tree, iteration, evals_used, thr.ref,
                       cfg.out_dir + "/checkpoint.json");
    }
    throw;
  }

  art.log_ml = tree.log_ml();
  art.ess = tree.root_ess();
  art.evals_used = evals_used;
  art.measure = tree.flatten_measure();
  art.tree = std::make_unique<Tree>(std::move(tree));
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_checkpoint(*art.tree, iteration, evals_used, thr.ref,
                     cfg.out_dir + "/checkpoint.json");
  }
  return art;
}

RunArtifacts is_loop(const RunConfig& cfg, const ModelBundle& model) {
  const HyperRect cube = HyperRect::unit(model.dim);
  RunArtifacts art;
  std::vector<std::vector<double>> xs;
  std::vector<double> log_w;
  double lse = neg_inf, lse2 = neg_inf;
  std::size_t evals_used = 0, iteration = 0;
  while (evals_used < cfg.budget) {
    RngStream rs = RngStream::derive(cfg.seed, iteration + 1, 1, 1);
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      auto z = sample_in_rect(cube, rs);
      auto tw = truncated_weight(*model.target, cube, z);
      xs.push_back(std::move(tw.x));
      log_w.push_back(tw.log_w);
      lse = log_add_exp(lse, tw.log_w);
      lse2 = log_add_exp(lse2, tw.log_w == neg_inf ? neg_inf : 2.0 * tw.log_w);
    }
    evals_used += cfg.batch_size;
    ++iteration;
    if (iteration % cfg.trace_cadence == 0 || evals_used >= cfg.budget) {
      double log_ml = lse == neg_inf ? neg_inf
                                     : lse - std::log(double(log_w.size()));
      double ess = lse == neg_inf ? 0.0 : std::exp(2.0 * lse - lse2);
      art.trace.push_back({evals_used, iteration, log_ml, ess, 1, 0});
    }
  }
  art.log_ml = lse == neg_inf ? neg_inf : lse - std::log(double(log_w.size()));
  art.ess = lse == neg_inf ? 0.0 : std::exp(2.0 * lse - lse2);
  art.evals_used = evals_used;
  if (lse != neg_inf) {
    art.measure.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      art.measure.push_back({std::move(xs[i]), std::exp(log_w[i] - lse)});
  }
  return art;
}

RunArtifacts smc_loop(const RunConfig& cfg, const ModelBundle& model) {
  const HyperRect cube = HyperRect::unit(model.dim);
  RunArtifacts art;
  std::vector<std::vector<double>> thetas;
  std::vector<double> log_w;
  double lse = neg_inf, lse2 = neg_inf;
  std::size_t evals_used = 0, iteration = 0;
  while (evals_used < cfg.budget) {
    RngStream rs = RngStream::derive(cfg.seed, iteration + 1, 1, 1);
    RunResult rr = smc_sweep(*model.ssm, cube, cfg.particles, rs);
    evals_used += rr.evals;
    thetas.push_back(rr.samples.front().x);
    log_w.push_back(rr.amalg_log_w);
    lse = log_add_exp(lse, rr.amalg_log_w);
    lse2 = log_add_exp(lse2, rr.amalg_log_w == neg_inf
                                 ? neg_inf
                                 : 2.0 * rr.amalg_log_w);
    ++iteration;
    if (iteration % cfg.trace_cadence == 0 || evals_used >= cfg.budget) {
      double log_ml = lse == neg_inf ? neg_inf
                                     : lse - std::log(double(log_w.size()));
      double ess = lse == neg_inf ? 0.0 : std::exp(2.0 * lse - lse2);
      art.trace.push_back({evals_used, iteration, log_ml, ess, 1, 0});
    }
  }
  art.log_ml = lse == neg_inf ? neg_inf : lse - std::log(double(log_w.size()));
  art.ess = lse == neg_inf ? 0.0 : std::exp(2.0 * lse - lse2);
  art.evals_used = evals_used;
  if (lse != neg_inf) {
    for (std::size_t i = 0; i < thetas.size(); ++i)
      art.measure.push_back({std::move(thetas[i]), std::exp(log_w[i] - lse)});
  }
  return art;
}

std::pair<RunArtifacts, PmmhState> pmmh_loop(const RunConfig& cfg,
                                             const ModelBundle& model) {
  if (!model.ssm)
    throw std::invalid_argument("pmmh requires a state-space experiment");
  const std::size_t sweep_cost = cfg.particles * model.ssm->series_length();
  RunArtifacts art;

  RngStream init_rng = RngStream::derive(cfg.seed, 0, 0, 4);
  PmmhState st = pmmh_init(*model.ssm, cfg.particles, init_rng);
  std::size_t evals_used = sweep_cost, iteration = 0;
  while (evals_used < cfg.budget) {
    RngStream rs = RngStream::derive(cfg.seed, iteration + 1, 0, 4);
    pmmh_step(*model.ssm, st, rs);
    evals_used += sweep_cost;
    ++iteration;
    if (iteration % cfg.trace_cadence == 0 || evals_used >= cfg.budget) {
      double acc = double(st.accepted) / double(iteration);
      art.trace.push_back({evals_used, iteration, st.log_z, acc, 1, 0});
    }
  }
  art.log_ml = st.log_z;
  art.ess = iteration > 0 ? double(st.accepted) / double(iteration) : 0.0;
  art.evals_used = evals_used;
  if (!st.trace.empty()) {
    double w = 1.0 / double(st.trace.size());
    for (const auto& row : st.trace) art.measure.push_back({row.theta, w});
  }
  return {std::move(art), std::move(st)};
}

RunArtifacts dispatch(const RunConfig& cfg, const ModelBundle& model,
                      PmmhState* chain_out) {
  if (cfg.algorithm == "it" || cfg.algorithm == "naive_it")
    return tree_loop(cfg, model, {});
  if (cfg.algorithm == "is") return is_loop(cfg, model);
  if (cfg.algorithm == "smc") return smc_loop(cfg, model);
  if (cfg.algorithm == "pmmh") {
    auto [art, st] = pmmh_loop(cfg, model);
    if (chain_out) *chain_out = std::move(st);
    return std::move(art);
  }
  throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
}

void write_common_artifacts(const RunConfig& cfg, const RunArtifacts& art,
                            bool append_trace) {
  fs::create_directories(cfg.out_dir);
  std::string trace_path = cfg.out_dir + "/trace.csv";
  if (append_trace && fs::exists(trace_path))
    append_trace_csv(art.trace, trace_path);
  else
    write_trace_csv(art.trace, trace_path);
  write_measure_jsonl(art.measure, cfg.out_dir + "/measure.jsonl");
  std::ofstream cfg_out(cfg.out_dir + "/config.json");
  if (!cfg_out) throw std::runtime_error("cannot write config echo");
  cfg_out << cfg.echo_json();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  double pos = q * double(v.size() - 1);
  std::size_t lo = std::size_t(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - double(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

RunArtifacts run_in_memory(const RunConfig& cfg) {
  RunConfig mem = cfg;
  mem.out_dir.clear();
  ModelBundle model = build_model(mem);
  return dispatch(mem, model, nullptr);
}

RunArtifacts run(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) return run_in_memory(cfg);
  ModelBundle model = build_model(cfg);
  PmmhState chain;
  RunArtifacts art = dispatch(cfg, model, &chain);
  write_common_artifacts(cfg, art, false);
  if (cfg.algorithm == "pmmh")
    write_pmmh_trace_csv(chain, cfg.out_dir + "/pmmh_trace.csv");
  return art;
}

RunArtifacts resume(const std::string& out_dir,
                    std::optional<std::size_t> new_budget) {
  std::ifstream cfg_in(out_dir + "/config.json");
  if (!cfg_in) throw std::runtime_error("resume: no config.json in " + out_dir);
  RunConfig cfg = config_from_echo(json::parse(cfg_in));
  cfg.out_dir = out_dir;
  if (new_budget) cfg.budget = *new_budget;
  if (cfg.algorithm != "it" && cfg.algorithm != "naive_it")
    throw std::invalid_argument("resume only supports tree algorithms");

  std::ifstream ck_in(out_dir + "/checkpoint.json");
  if (!ck_in)
    throw std::runtime_error("resume: no checkpoint.json in " + out_dir);
  json ck = json::parse(ck_in);
  if (ck.value("format", "") != "itree-run-checkpoint" ||
      ck.value("version", 0) != 1)
    throw std::runtime_error("resume: unknown checkpoint format or version");

  TreeLoopSeed seed_state;
  seed_state.iteration = ck.at("iteration").get<std::size_t>();
  seed_state.evals_used = ck.at("evals_used").get<std::size_t>();
  seed_state.threshold_ref = ck.at("threshold_ref").is_null()
                                 ? neg_inf
                                 : ck.at("threshold_ref").get<double>();
  seed_state.tree =
      std::make_unique<Tree>(Tree::from_json(ck.at("tree").dump()));

  ModelBundle model = build_model(cfg);
  RunArtifacts art = tree_loop(cfg, model, std::move(seed_state));
  write_common_artifacts(cfg, art, true);
  return art;
}

void compare(const std::vector<RunConfig>& configs, std::size_t replications,
             const std::string& out_path) {
  if (configs.empty()) throw std::invalid_argument("compare: no configs");
  if (replications == 0) throw std::invalid_argument("compare: replications == 0");
  for (const auto& c : configs)
    if (c.budget != configs.front().budget)
      throw std::invalid_argument("compare: budgets differ across configs");

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << std::setprecision(17);
  out << "config,experiment,algorithm,evals_used,"
         "log_ml_q25,log_ml_median,log_ml_q75,ess_q25,ess_median,ess_q75\n";

  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    std::vector<std::vector<TraceRow>> traces;
    for (std::size_t rep = 0; rep < replications; ++rep) {
      RunConfig c = configs[ci];
      c.seed = configs[ci].seed + rep;
      traces.push_back(run_in_memory(c).trace);
    }
    std::size_t len = traces.front().size();
    for (const auto& t : traces) len = std::min(len, t.size());
    for (std::size_t row = 0; row < len; ++row) {
      std::vector<double> lml, ess, evals;
      for (const auto& t : traces) {
        lml.push_back(t[row].log_ml_estimate);
        ess.push_back(t[row].ess);
        evals.push_back(double(t[row].evals_used));
      }
      out << ci << "," << configs[ci].experiment << ","
          << configs[ci].algorithm << "," << std::llround(quantile(evals, 0.5))
          << "," << quantile(lml, 0.25) << "," << quantile(lml, 0.5) << ","
          << quantile(lml, 0.75) << "," << quantile(ess, 0.25) << ","
          << quantile(ess, 0.5) << "," << quantile(ess, 0.75) << "\n";
    }
  }
}

}  // namespace itree
