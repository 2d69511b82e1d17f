#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "itree/engine.hpp"

using namespace itree;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string scratch_dir(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / "itree-tests" / leaf;
  fs::remove_all(dir);
  return dir.string();
}

double quantile_interp(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * double(v.size() - 1);
  std::size_t lo = std::size_t(pos);
  double frac = pos - double(lo);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("values land in the right fields") {
    auto cfg = parse_config_text(
        "[run]\n"
        "experiment = gmm  # inline comment\n"
        "algorithm = naive_it\n"
        "seed = 7\n"
        "budget = 5000\n"
        "trace_cadence = 3\n"
        "out = /tmp/x\n"
        "\n"
        "[base]\n"
        "kind = is\n"
        "batch_size = 25\n"
        "\n"
        "[traversal]\n"
        "beta = 0.2\n"
        "schedules = gmm\n"
        "\n"
        "[model]\n"
        "gmm_components = 2\n"
        "data_seed = 11\n");
    CHECK(cfg.experiment == "gmm");
    CHECK(cfg.algorithm == "naive_it");
    CHECK(cfg.seed == 7);
    CHECK(cfg.budget == 5000);
    CHECK(cfg.trace_cadence == 3);
    CHECK(cfg.out_dir == "/tmp/x");
    CHECK(cfg.base_kind == "is");
    CHECK(cfg.batch_size == 25);
    CHECK(cfg.traversal.beta == doctest::Approx(0.2));
    CHECK(cfg.schedule_preset == "gmm");
    CHECK(cfg.gmm_components == 2);
    CHECK(cfg.data_seed == 11);
    CHECK_FALSE(cfg.integration);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config_text("[run]\nbogus_key = 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[run]\nbudget = abc\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[run]\nbudget = 0\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[run]\ntrace_cadence = 0\n"),
                    std::invalid_argument);
  }
  SUBCASE("defaults") {
    auto cfg = parse_config_text("");
    CHECK(cfg.experiment == "toy");
    CHECK(cfg.algorithm == "it");
    CHECK(cfg.resolved_base_kind() == "is");
    auto chaos = parse_config_text("[run]\nexperiment = chaos\n");
    CHECK(chaos.resolved_base_kind() == "smc");
    auto net = parse_config_text("[run]\nexperiment = network_single\n");
    CHECK(net.integration);
    auto net_off = parse_config_text(
        "[run]\nexperiment = network_single\nintegration = false\n");
    CHECK_FALSE(net_off.integration);
  }
}

TEST_CASE("run_in_memory is deterministic in the seed") {
  RunConfig cfg;
  cfg.experiment = "toy";
  cfg.algorithm = "it";
  cfg.seed = 5;
  cfg.budget = 3000;
  cfg.batch_size = 50;

  auto a = run_in_memory(cfg);
  auto b = run_in_memory(cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].log_ml_estimate == b.trace[i].log_ml_estimate);
    CHECK(a.trace[i].ess == b.trace[i].ess);
    CHECK(a.trace[i].evals_used == b.trace[i].evals_used);
  }
  CHECK(a.log_ml == b.log_ml);

  cfg.seed = 6;
  auto c = run_in_memory(cfg);
  CHECK(a.log_ml != c.log_ml);
}

TEST_CASE("budget floor still produces work") {
  RunConfig cfg;
  cfg.experiment = "toy";
  cfg.budget = 1;  // one refinement iteration, then stop
  cfg.batch_size = 10;
  auto art = run_in_memory(cfg);
  CHECK(art.evals_used >= 1);
  CHECK_FALSE(art.trace.empty());
  CHECK(art.trace.back().evals_used == art.evals_used);
}

TEST_CASE("tree run artifacts are coherent") {
  RunConfig cfg;
  cfg.experiment = "toy";
  cfg.budget = 2000;
  cfg.batch_size = 50;
  auto art = run_in_memory(cfg);
  REQUIRE(art.tree);
  CHECK(art.log_ml == art.tree->log_ml());
  CHECK(art.trace.back().n_leaves == art.tree->n_leaves());
  double total = 0.0;
  for (const auto& p : art.measure) total += p.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(art.evals_used >= cfg.budget);
}

TEST_CASE("run writes the full artifact set") {
  RunConfig cfg;
  cfg.experiment = "toy";
  cfg.budget = 1000;
  cfg.batch_size = 50;
  cfg.out_dir = scratch_dir("artifacts");
  auto art = run(cfg);
  CHECK(fs::exists(cfg.out_dir + "/trace.csv"));
  CHECK(fs::exists(cfg.out_dir + "/measure.jsonl"));
  CHECK(fs::exists(cfg.out_dir + "/checkpoint.json"));
  CHECK(fs::exists(cfg.out_dir + "/config.json"));

  auto trace = slurp(cfg.out_dir + "/trace.csv");
  CHECK(trace.rfind("evals_used,iteration,log_ml_estimate,ess,n_leaves,"
                    "max_depth\n", 0) == 0);

  // byte-identical rerun
  fs::remove_all(cfg.out_dir);
  run(cfg);
  CHECK(slurp(cfg.out_dir + "/trace.csv") == trace);
}

TEST_CASE("resume matches an uninterrupted run") {
  RunConfig full;
  full.experiment = "toy";
  full.budget = 4000;
  full.batch_size = 50;
  full.out_dir = scratch_dir("resume-full");
  auto straight = run(full);

  RunConfig half = full;
  half.budget = 2000;
  half.out_dir = scratch_dir("resume-half");
  run(half);
  auto resumed = resume(half.out_dir, 4000);

  CHECK(resumed.log_ml == straight.log_ml);
  CHECK(resumed.ess == straight.ess);
  CHECK(resumed.evals_used == straight.evals_used);
  CHECK(slurp(half.out_dir + "/trace.csv") ==
        slurp(full.out_dir + "/trace.csv"));
}

TEST_CASE("compare recomputes per-row quantiles") {
  RunConfig cfg;
  cfg.experiment = "toy";
  cfg.algorithm = "is";
  cfg.seed = 3;
  cfg.budget = 500;
  cfg.batch_size = 100;

  std::string out = scratch_dir("compare") + ".csv";
  fs::create_directories(fs::path(out).parent_path());
  compare({cfg}, 3, out);

  // oracle: rerun the replications and redo the quantiles
  std::vector<std::vector<TraceRow>> traces;
  for (std::size_t rep = 0; rep < 3; ++rep) {
    RunConfig c = cfg;
    c.seed = cfg.seed + rep;
    traces.push_back(run_in_memory(c).trace);
  }

  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "config,experiment,algorithm,evals_used,log_ml_q25,log_ml_median,"
        "log_ml_q75,ess_q25,ess_median,ess_q75");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    REQUIRE(row < traces[0].size());
    std::vector<double> lml, ess;
    for (const auto& t : traces) {
      lml.push_back(t[row].log_ml_estimate);
      ess.push_back(t[row].ess);
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 10);
    CHECK(fields[1] == "toy");
    CHECK(fields[2] == "is");
    CHECK(std::stod(fields[4]) ==
          doctest::Approx(quantile_interp(lml, 0.25)).epsilon(1e-12));
    CHECK(std::stod(fields[5]) ==
          doctest::Approx(quantile_interp(lml, 0.5)).epsilon(1e-12));
    CHECK(std::stod(fields[6]) ==
          doctest::Approx(quantile_interp(lml, 0.75)).epsilon(1e-12));
    CHECK(std::stod(fields[8]) ==
          doctest::Approx(quantile_interp(ess, 0.5)).epsilon(1e-12));
    ++row;
  }
  CHECK(row == traces[0].size());

  RunConfig other = cfg;
  other.budget = 600;
  CHECK_THROWS_AS(compare({cfg, other}, 2, out), std::invalid_argument);
}

TEST_CASE("known-integrand run on the single-edge network") {
  RunConfig cfg;
  cfg.experiment = "network_single";
  cfg.integration = true;
  cfg.budget = 3000;
  cfg.batch_size = 50;
  auto art = run_in_memory(cfg);
  REQUIRE(art.tree);
  double est = art.tree->estimate_integral();
  CHECK(est > 0.0);
  CHECK(est < 1.0);
}
