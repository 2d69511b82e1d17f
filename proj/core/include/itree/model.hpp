#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "itree/hyperrect.hpp"

namespace itree {

// Unnormalized target gamma together with the proposal reparameterization g.
// g maps the unit hypercube to parameter space; pushing uniform z through g
// yields the proposal density q. Only the ratio gamma/q is ever needed.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dim() const = 0;

  // x = g(z); total on the open unit hypercube.
  virtual std::vector<double> to_params(const std::vector<double>& z) const = 0;

  // log(gamma(x)/q(x)); -inf when gamma vanishes.
  virtual double log_ratio(const std::vector<double>& x) const = 0;

  // Known integrand for the integration variant; models without one return 0.
  virtual bool has_integrand() const { return false; }
  virtual double integrand(const std::vector<double>& x) const { return 0.0; }
};

struct TruncatedWeight {
  std::vector<double> x;
  double log_w;  // log(gamma/q) + log volume
};

// Weight of a draw under the proposal truncated to `rect`. Throws on
// non-finite density evaluations; gamma == 0 gives log_w == -inf.
inline TruncatedWeight truncated_weight(const TargetModel& model,
                                        const HyperRect& rect,
                                        const std::vector<double>& z) {
  TruncatedWeight out;
  out.x = model.to_params(z);
  double lr = model.log_ratio(out.x);
  if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity())
    throw std::runtime_error("truncated_weight: non-finite density");
  out.log_w = lr + rect.log_volume();
  return out;
}

}  // namespace itree
