#pragma once

#include <cstddef>
#include <vector>

namespace itree {

// One retained weighted point of a run. `frac` is the within-run share of
// the run's amalgamated weight (fracs of a run sum to 1 unless the run has
// zero total weight).
struct RetainedSample {
  std::vector<double> x;
  double frac = 0.0;
};

// Output of one base-inference run under a truncated proposal. The whole run
// is summarized by a single amalgamated log-weight; node statistics operate
// on these, the samples feed only the empirical measure.
struct RunResult {
  std::vector<RetainedSample> samples;
  double amalg_log_w = 0.0;
  std::vector<double> rep_z;  // representative location in the unit cube
  double f_value = 0.0;       // amalgamated integrand value (integration variant)
  std::size_t evals = 0;      // target-density evaluations consumed
};

}  // namespace itree
