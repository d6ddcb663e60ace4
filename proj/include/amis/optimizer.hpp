#pragma once

#include <functional>
#include <json.hpp>
#include <vector>

#include "amis/estimator.hpp"
#include "amis/geometry.hpp"

namespace amis {

struct OptimizationResult {
  double theta_n = 0.0;
  std::vector<Point> minimizers;
  int evaluations = 0;
  double tolerance_achieved = 0.0;
  bool converged = false;
  nlohmann::json to_json() const;
};

struct MinimizeOptions {
  int budget = 4000;
  double tol = 1e-8;
  std::size_t grid_per_dim = 32;
  std::size_t max_starts = 8;
};

using Objective = std::function<double(std::span<const double>)>;

/// Box-constrained global minimisation: tensor-grid scan followed by compass
/// search from the best grid local minima. Deterministic.
OptimizationResult minimize(const Objective& fn, const Box& box, const MinimizeOptions& opt = {});
OptimizationResult minimize(const Estimator& est, int budget = 4000, double tol = 1e-8);

/// min over the given points of f_n.
double inf_over_set(const Estimator& est, const std::vector<Point>& points);

}  // namespace amis
