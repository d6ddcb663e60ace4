#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace amis {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box with closed sides.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> sides);

  std::size_t dim() const noexcept { return sides_.size(); }
  const std::vector<Interval>& sides() const noexcept { return sides_; }
  const Interval& operator[](std::size_t d) const { return sides_[d]; }

  bool contains(std::span<const double> x) const;
  bool contains(const Box& other) const;
  Point center() const;
  Point clamp(std::span<const double> x) const;
  double volume() const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> sides_;
};

/// Support of a density: either all of R^r or a box.
struct SupportRegion {
  enum class Kind { all, box };
  Kind kind = Kind::all;
  std::size_t dim = 0;
  Box box;

  static SupportRegion everywhere(std::size_t dim);
  static SupportRegion boxed(Box b);

  bool contains(std::span<const double> theta) const;
  bool covers(const SupportRegion& other) const;

  friend bool operator==(const SupportRegion&, const SupportRegion&) = default;
};

/// Flat storage for many points of the same dimension.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  Point point(std::size_t i) const;
  void push_back(std::span<const double> x);
  const std::vector<double>& coords() const noexcept { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Tensor grid with `per_dim` equally spaced nodes per side, endpoints included.
PointSet tensor_grid(const Box& box, std::size_t per_dim);

/// Nodes per side so that the tensor grid has at least `total` points.
std::size_t nodes_per_side(std::size_t total, std::size_t dim);

double sup_norm_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

void require_finite(std::span<const double> x, const char* what);

}  // namespace amis
