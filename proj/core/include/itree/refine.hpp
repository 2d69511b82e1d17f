#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "itree/base_infer.hpp"
#include "itree/tree.hpp"

namespace itree {

struct RefineConfig {
  std::size_t min_runs = 16;       // N_j threshold before splits are attempted
  double max_ess_ratio = 0.5;      // split only when local ESS/N falls below
  double sig_level = 0.05;         // t-test acceptance level
  std::size_t n_candidates = 100;
  std::size_t runs_per_refinement = 16;  // b
};

struct SplitCandidate {
  std::size_t dim = 0;
  double point = 0.0;
  HyperRect left;
  HyperRect right;
  double log_omega_left = 0.0;   // implied child masses from existing samples
  double log_omega_right = 0.0;
};

// Runs the base algorithm once for a given region; the engine binds this to
// IS or SMC with the right batch size and rng stream.
using BaseRunner = std::function<RunResult(const HyperRect&, std::size_t run_index)>;

bool should_split(const TreeNode& node, const RefineConfig& cfg);

// Random axis-aligned candidates; implied child masses come from partitioning
// the node's amalgamated weights by their representative z. Empty when the
// node has no usable weight.
std::vector<SplitCandidate> propose_candidates(const TreeNode& node,
                                               std::size_t n_cand,
                                               RngStream& rng);

// Entropy split loss, lower is better. 0*log(./0) := 0.
double split_loss(const SplitCandidate& cand);

// Moves the split point so the lower-mass child's interval shrinks by 25%.
// Equal masses shrink the right child.
SplitCandidate shrink_split(const TreeNode& node, const SplitCandidate& best);

// Welch t-test on the children's amalgamated log weights; accept iff
// p < sig_level.
bool accept_split(std::span<const double> left_logw,
                  std::span<const double> right_logw, double sig_level);

enum class RefineAction { Extended, Split, SplitRejected };

struct RefineOutcome {
  RefineAction action = RefineAction::Extended;
  std::size_t runs_added = 0;
  std::size_t evals = 0;
};

// One refinement of the selected leaf: either b further runs at the leaf, or
// a split with b initialization runs per child, or a rejected split whose
// child samples are merged back into the leaf (weights rescaled to the
// parent's volume).
RefineOutcome refine(Tree& tree, int leaf_id, const BaseRunner& base,
                     const RefineConfig& cfg, RngStream& rng);

}  // namespace itree
