#include "amis/numeric.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>

#include "amis/errors.hpp"

namespace amis {

double compensated_sum(std::span<const double> values) {
  NeumaierSum s;
  for (double v : values) s.add(v);
  return s.value();
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0,1)");
  static const boost::math::normal_distribution<double> unit(0.0, 1.0);
  return boost::math::quantile(unit, p);
}

double std_normal_interval_mass(double a, double b) {
  if (b <= a) return 0.0;
  const double r = 1.0 / std::sqrt(2.0);
  if (a >= 0.0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
  return 1.0 - 0.5 * std::erfc(-a * r) - 0.5 * std::erfc(b * r);
}

void WeightedMoments::add(std::span<const double> x, double w) {
  if (x.size() != mean_.size()) throw InputError("weighted moments: dimension mismatch");
  if (!(w > 0.0) || !std::isfinite(w)) return;
  total_ += w;
  ++count_;
  const double ratio = w / total_;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double delta = x[d] - mean_[d];
    mean_[d] += ratio * delta;
    m2_[d] += w * delta * (x[d] - mean_[d]);
  }
}

std::vector<double> WeightedMoments::variance() const {
  std::vector<double> v(m2_.size(), 0.0);
  if (total_ <= 0.0) return v;
  for (std::size_t d = 0; d < v.size(); ++d) v[d] = std::max(0.0, m2_[d] / total_);
  return v;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace amis
