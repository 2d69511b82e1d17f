#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "itree/rng.hpp"

namespace itree {

// Axis-aligned box inside the unit hypercube. Every region owned by a tree
// node is one of these; splits always cut a single dimension.
struct HyperRect {
  std::vector<double> lo;
  std::vector<double> hi;

  HyperRect() = default;
  HyperRect(std::vector<double> l, std::vector<double> h);

  static HyperRect unit(std::size_t dim);

  std::size_t dim() const { return lo.size(); }
  bool contains(const std::vector<double>& z) const;

  double volume() const;
  double log_volume() const;
};

// Guard margin keeping split points strictly interior (fraction of the
// interval length).
inline constexpr double kSplitGuard = 1e-9;

bool split_point_valid(const HyperRect& r, std::size_t dim, double point);

// Cuts dimension `dim` at `point`; throws if the point is not strictly
// interior (with guard margin).
std::pair<HyperRect, HyperRect> split_rect(const HyperRect& r, std::size_t dim,
                                           double point);

std::vector<double> sample_in_rect(const HyperRect& r, RngStream& rng);

}  // namespace itree
