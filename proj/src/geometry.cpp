#include "amis/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amis/errors.hpp"

namespace amis {

Box::Box(std::vector<Interval> sides) : sides_(std::move(sides)) {
  for (const auto& s : sides_) {
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || !(s.lo < s.hi))
      throw InputError("box side must be a finite interval with lo < hi");
  }
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != dim()) throw InputError("box: dimension mismatch");
  for (std::size_t d = 0; d < dim(); ++d)
    if (!(x[d] >= sides_[d].lo && x[d] <= sides_[d].hi)) return false;
  return true;
}

bool Box::contains(const Box& other) const {
  if (other.dim() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d)
    if (other.sides_[d].lo < sides_[d].lo || other.sides_[d].hi > sides_[d].hi) return false;
  return true;
}

Point Box::center() const {
  Point c(dim());
  for (std::size_t d = 0; d < dim(); ++d) c[d] = 0.5 * (sides_[d].lo + sides_[d].hi);
  return c;
}

Point Box::clamp(std::span<const double> x) const {
  Point c(x.begin(), x.end());
  for (std::size_t d = 0; d < dim(); ++d) c[d] = std::clamp(c[d], sides_[d].lo, sides_[d].hi);
  return c;
}

double Box::volume() const {
  double v = 1.0;
  for (const auto& s : sides_) v *= s.width();
  return v;
}

SupportRegion SupportRegion::everywhere(std::size_t dim) {
  SupportRegion r;
  r.kind = Kind::all;
  r.dim = dim;
  return r;
}

SupportRegion SupportRegion::boxed(Box b) {
  SupportRegion r;
  r.kind = Kind::box;
  r.dim = b.dim();
  r.box = std::move(b);
  return r;
}

bool SupportRegion::contains(std::span<const double> theta) const {
  if (theta.size() != dim) throw InputError("support: dimension mismatch");
  if (kind == Kind::all) return true;
  return box.contains(theta);
}

bool SupportRegion::covers(const SupportRegion& other) const {
  if (other.dim != dim) return false;
  if (kind == Kind::all) return true;
  if (other.kind == Kind::all) return false;
  return box.contains(other.box);
}

Point PointSet::point(std::size_t i) const {
  auto s = (*this)[i];
  return Point(s.begin(), s.end());
}

void PointSet::push_back(std::span<const double> x) {
  if (x.size() != dim_) throw InputError("point set: dimension mismatch");
  coords_.insert(coords_.end(), x.begin(), x.end());
}

PointSet tensor_grid(const Box& box, std::size_t per_dim) {
  if (per_dim < 2) throw InputError("grid needs at least 2 nodes per side");
  const std::size_t m = box.dim();
  PointSet out(m);
  std::size_t total = 1;
  for (std::size_t d = 0; d < m; ++d) total *= per_dim;
  Point x(m);
  std::vector<std::size_t> idx(m, 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    // last coordinate varies slowest so rows read naturally in CSV output
    for (std::size_t d = 0; d < m; ++d) {
      idx[d] = rem % per_dim;
      rem /= per_dim;
    }
    for (std::size_t d = 0; d < m; ++d) {
      const auto& s = box[d];
      x[d] = idx[d] + 1 == per_dim
                 ? s.hi
                 : s.lo + s.width() * static_cast<double>(idx[d]) / static_cast<double>(per_dim - 1);
    }
    out.push_back(x);
  }
  return out;
}

std::size_t nodes_per_side(std::size_t total, std::size_t dim) {
  if (dim == 0) throw InputError("dimension must be positive");
  auto n = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(total), 1.0 / dim) - 1e-9));
  n = std::max<std::size_t>(n, 2);
  std::size_t prod = 1;
  for (std::size_t d = 0; d < dim; ++d) prod *= n;
  if (prod < total) ++n;
  return n;
}

double sup_norm_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) m = std::max(m, std::fabs(a[d] - b[d]));
  return m;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw InputError(std::string(what) + " contains a non-finite value");
}

}  // namespace amis
