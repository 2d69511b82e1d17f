#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itree/engine.hpp"

namespace {

void apply_overrides(itree::RunConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<std::size_t> budget,
                     const std::string& out) {
  if (seed) cfg.seed = *seed;
  if (budget) cfg.budget = *budget;
  if (!out.empty()) cfg.out_dir = out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive tree-partitioned Monte Carlo inference"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;

  auto* run_cmd = app.add_subcommand("run", "execute one configured experiment");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--seed", seed, "master seed override");
  run_cmd->add_option("--budget", budget, "evaluation budget override");
  run_cmd->add_option("--out", out_dir, "output directory override");

  std::vector<std::string> compare_configs;
  std::size_t replications = 10;
  auto* cmp_cmd = app.add_subcommand("compare",
                                     "replicate several configs and summarize");
  cmp_cmd->add_option("--config", compare_configs, "config files")->required();
  cmp_cmd->add_option("--replications", replications, "replications per config");
  cmp_cmd->add_option("--seed", seed, "master seed override");
  cmp_cmd->add_option("--budget", budget, "evaluation budget override");
  cmp_cmd->add_option("--out", out_dir, "summary CSV path")->required();

  std::string resume_dir;
  auto* res_cmd = app.add_subcommand("resume", "continue a checkpointed run");
  res_cmd->add_option("--out", resume_dir, "directory of the checkpointed run")
      ->required();
  res_cmd->add_option("--budget", budget, "raised evaluation budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      itree::RunConfig cfg = itree::parse_config_file(config_path);
      apply_overrides(cfg, seed, budget, out_dir);
      auto art = itree::run(cfg);
      std::cout << "log_ml=" << art.log_ml << " ess=" << art.ess
                << " evals=" << art.evals_used << "\n";
    } else if (*cmp_cmd) {
      std::vector<itree::RunConfig> cfgs;
      for (const auto& p : compare_configs) {
        itree::RunConfig cfg = itree::parse_config_file(p);
        apply_overrides(cfg, seed, budget, "");
        cfgs.push_back(std::move(cfg));
      }
      itree::compare(cfgs, replications, out_dir);
      std::cout << "wrote " << out_dir << "\n";
    } else if (*res_cmd) {
      std::optional<std::size_t> nb = budget;
      auto art = itree::resume(resume_dir, nb);
      std::cout << "log_ml=" << art.log_ml << " ess=" << art.ess
                << " evals=" << art.evals_used << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
