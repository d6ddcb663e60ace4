#pragma once

#include <optional>
#include <vector>

#include "amis/geometry.hpp"
#include "amis/numeric.hpp"
#include "amis/problem.hpp"
#include "amis/sampler.hpp"

namespace amis {

struct DeviationSample {
  Point x;
  double H_n = 0.0;   // f_n(x) - f(x)
  double S_n = 0.0;   // n * H_n
  std::optional<std::vector<double>> upsilon;
};

struct Envelope {
  double L = 0.0;  // beta + |f|
  double C = 0.0;  // beta * (|f| + 1)
};

/// Envelope constants at x; `domination` scales the reference-proposal envelope
/// to cover every proposal of a policy.
Envelope envelope(const ProblemInstance& p, std::span<const double> x, double domination = 1.0);

struct GridProfile {
  PointSet xs;
  std::vector<double> f_n;
  std::vector<double> H_n;
  double sup_abs_H = 0.0;
};

/// Weighted sample-average objective built from an importance-sampling history.
class Estimator {
 public:
  explicit Estimator(ProblemPtr problem);
  Estimator(ProblemPtr problem, const History& history);

  const ProblemInstance& problem() const noexcept { return *problem_; }
  const ProblemPtr& problem_ptr() const noexcept { return problem_; }
  std::size_t n() const noexcept { return psi_.size(); }

  void append(std::span<const double> theta, double psi);
  void append(const SampleRecord& r) { append(r.theta, r.proposal_density_value); }

  /// Keeps a running compensated sum at x; later evaluations there are O(1).
  void track(std::span<const double> x);
  std::size_t tracked_count() const noexcept { return tracked_.size(); }

  double evaluate_fn(std::span<const double> x) const;
  /// Fresh pass over all draws, ignoring any tracked sum.
  double recompute_fn(std::span<const double> x) const;
  DeviationSample deviation(std::span<const double> x, bool retain_upsilon = false) const;
  GridProfile grid_profile(const PointSet& grid) const;

  /// Running (1/n) sum of squared martingale differences at a tracked point.
  double tracked_mean_square(std::size_t k) const;

 private:
  void check_point(std::span<const double> x) const;

  ProblemPtr problem_;
  std::size_t dim_theta_;
  std::vector<double> thetas_;
  std::vector<double> psi_;
  PointSet tracked_;
  std::vector<double> tracked_f_;
  std::vector<NeumaierSum> sums_;
  std::vector<NeumaierSum> squares_;
  std::vector<double> buf_;
};

}  // namespace amis
