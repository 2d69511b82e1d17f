#include "itree/hyperrect.hpp"

#include <cmath>
#include <stdexcept>

namespace itree {

HyperRect::HyperRect(std::vector<double> l, std::vector<double> h)
    : lo(std::move(l)), hi(std::move(h)) {
  if (lo.size() != hi.size())
    throw std::invalid_argument("HyperRect: dimension mismatch");
  for (std::size_t t = 0; t < lo.size(); ++t) {
    if (!(lo[t] < hi[t]) || lo[t] < 0.0 || hi[t] > 1.0)
      throw std::invalid_argument("HyperRect: invalid interval");
  }
}

HyperRect HyperRect::unit(std::size_t dim) {
  return HyperRect(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

bool HyperRect::contains(const std::vector<double>& z) const {
  if (z.size() != dim()) return false;
  for (std::size_t t = 0; t < dim(); ++t)
    if (z[t] < lo[t] || z[t] > hi[t]) return false;
  return true;
}

double HyperRect::volume() const {
  double v = 1.0;
  for (std::size_t t = 0; t < dim(); ++t) v *= hi[t] - lo[t];
  return v;
}

double HyperRect::log_volume() const {
  double v = 0.0;
  for (std::size_t t = 0; t < dim(); ++t) v += std::log(hi[t] - lo[t]);
  return v;
}

bool split_point_valid(const HyperRect& r, std::size_t dim, double point) {
  if (dim >= r.dim()) return false;
  double guard = kSplitGuard * (r.hi[dim] - r.lo[dim]);
  return point > r.lo[dim] + guard && point < r.hi[dim] - guard;
}

std::pair<HyperRect, HyperRect> split_rect(const HyperRect& r, std::size_t dim,
                                           double point) {
  if (!split_point_valid(r, dim, point))
    throw std::invalid_argument("split_rect: point outside open interval");
  HyperRect left = r, right = r;
  left.hi[dim] = point;
  right.lo[dim] = point;
  return {left, right};
}

std::vector<double> sample_in_rect(const HyperRect& r, RngStream& rng) {
  std::vector<double> z(r.dim());
  for (std::size_t t = 0; t < r.dim(); ++t)
    z[t] = rng.uniform(r.lo[t], r.hi[t]);
  return z;
}

}  // namespace itree
