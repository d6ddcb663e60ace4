#pragma once

#include <memory>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "amis/geometry.hpp"
#include "amis/rng.hpp"

namespace amis {

/// Closed-form proposal density. Immutable once built; share via DensityPtr.
class Density {
 public:
  enum class Family { gaussian, uniform_box, gaussian_mixture, truncated_gaussian, mixture };

  /// Diagonal gaussian on R^r.
  static Density gaussian(Point mean, Point scale);
  static Density uniform_box(Box box);
  /// Diagonal gaussian restricted to a box and renormalised.
  static Density truncated_gaussian(Point mean, Point scale, Box box);
  /// Finite mixture; one component's support must cover all the others.
  static Density mixture(std::vector<double> weights, std::vector<Density> components);

  static Density from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Family family() const noexcept { return family_; }
  std::string family_name() const;
  std::size_t dim() const noexcept { return dim_; }
  const SupportRegion& support() const noexcept { return support_; }
  const Point& mean() const noexcept { return mean_; }
  const Point& scale() const noexcept { return scale_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<Density>& components() const noexcept { return components_; }

  double evaluate(std::span<const double> theta) const;
  void sample(RngStream& rng, std::span<double> out) const;
  Point sample(RngStream& rng) const;

  friend bool operator==(const Density& a, const Density& b);

 private:
  Density() = default;
  double evaluate_unchecked(std::span<const double> theta) const;
  void sample_unchecked(RngStream& rng, std::span<double> out) const;

  Family family_ = Family::gaussian;
  std::size_t dim_ = 0;
  Point mean_;
  Point scale_;
  SupportRegion support_;
  std::vector<double> weights_;
  std::vector<Density> components_;
  double log_norm_ = 0.0;
  Point lo_z_, hi_z_;  // standardised truncation limits
};

using DensityPtr = std::shared_ptr<const Density>;

/// sup over theta of a(theta)/b(theta), or +inf when no finite bound is known.
double density_ratio_bound(const Density& a, const Density& b);

}  // namespace amis
