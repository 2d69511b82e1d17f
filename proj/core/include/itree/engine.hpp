#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "itree/base_infer.hpp"
#include "itree/integration.hpp"
#include "itree/refine.hpp"
#include "itree/traversal.hpp"
#include "itree/tree.hpp"

namespace itree {

// Fully resolved experiment configuration. Parsed from a sectioned key-value
// file; every output artifact embeds the resolved values.
struct RunConfig {
  // [run]
  std::string experiment = "toy";  // toy | gmm | chaos | network | network_single
  std::string algorithm = "it";    // it | naive_it | is | smc | pmmh
  std::uint64_t seed = 1;
  std::size_t budget = 100000;
  std::size_t trace_cadence = 1;  // refinement iterations between trace rows
  std::string out_dir = "out";
  bool integration = false;  // known-integrand traversal (network models)

  // [base]
  std::string base_kind;  // "is" | "smc"; empty = per-experiment default
  std::size_t batch_size = 100;  // IS draws per run
  std::size_t particles = 100;   // SMC particles per sweep

  // [traversal]
  TraversalParams traversal;
  std::string schedule_preset;  // "gmm" | "chaos" | "none"; empty = default

  // [refine]
  RefineConfig refine;

  // [model]
  std::uint64_t data_seed = 42;
  double toy_y = 1.0;
  double toy_obs_sd = 1.0;
  double toy_prior_sd = 1.0;
  std::size_t gmm_components = 4;
  std::size_t gmm_data_dim = 2;
  std::size_t gmm_n_data = 200;
  std::size_t chaos_series_length = 50;
  std::size_t chaos_obs_dim = 20;

  // Raw parsed keys, kept for the config echo.
  std::map<std::string, std::string> raw;

  std::string resolved_base_kind() const;
  std::string echo_json() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

struct TraceRow {
  std::size_t evals_used = 0;
  std::size_t iteration = 0;
  double log_ml_estimate = 0.0;
  double ess = 0.0;
  std::size_t n_leaves = 0;
  int max_depth = 0;
};

void write_trace_csv(const std::vector<TraceRow>& trace,
                     const std::string& path);

struct RunArtifacts {
  std::vector<TraceRow> trace;
  double log_ml = 0.0;
  double ess = 0.0;
  std::size_t evals_used = 0;
  std::vector<WeightedPoint> measure;
  std::unique_ptr<Tree> tree;  // null for non-tree algorithms
};

// The model instances an experiment runs against. Exactly one of target/ssm
// is set depending on the base inference kind.
struct ModelBundle {
  std::unique_ptr<TargetModel> target;
  std::unique_ptr<SsmModel> ssm;
  std::size_t dim = 0;
};

ModelBundle build_model(const RunConfig& cfg);

// Executes the configured algorithm to budget exhaustion. When `out_dir` is
// non-empty, writes trace.csv, measure.jsonl, checkpoint.json (tree
// algorithms) and config.json there.
RunArtifacts run(const RunConfig& cfg);

// In-memory variant used by compare and the tests; writes nothing.
RunArtifacts run_in_memory(const RunConfig& cfg);

// Continues a checkpointed tree run, optionally with a raised budget.
RunArtifacts resume(const std::string& out_dir,
                    std::optional<std::size_t> new_budget);

// Runs each config `replications` times (seeds master_seed + rep) and writes
// per-row median / 25% / 75% quantiles of log ML and ESS against evals.
void compare(const std::vector<RunConfig>& configs, std::size_t replications,
             const std::string& out_path);

}  // namespace itree
