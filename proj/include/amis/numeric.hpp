#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace amis {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Neumaier compensated sum.
class NeumaierSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }
  void reset() noexcept { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

inline double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double std_normal_quantile(double p);

/// P(a <= Z <= b) for a standard normal Z, accurate in either tail.
double std_normal_interval_mass(double a, double b);

/// Incremental weighted mean/variance (West's update); deterministic in insertion order.
class WeightedMoments {
 public:
  explicit WeightedMoments(std::size_t dim = 0) : mean_(dim, 0.0), m2_(dim, 0.0) {}
  void add(std::span<const double> x, double w);
  double total_weight() const noexcept { return total_; }
  std::size_t count() const noexcept { return count_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  std::vector<double> variance() const;

 private:
  std::vector<double> mean_;
  std::vector<double> m2_;
  double total_ = 0.0;
  std::size_t count_ = 0;
};

/// Empirical quantile with linear interpolation (type 7). Input need not be sorted.
double quantile(std::vector<double> values, double q);

}  // namespace amis
