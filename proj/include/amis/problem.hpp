#pragma once

#include <functional>
#include <json.hpp>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amis/density.hpp"
#include "amis/geometry.hpp"

namespace amis {

using ScalarFn = std::function<double(std::span<const double>)>;
using IntegrandFn = std::function<double(std::span<const double> x, std::span<const double> theta)>;
/// Fills out[j] = F(xs[j], theta).
using IntegrandBatchFn =
    std::function<void(const PointSet& xs, std::span<const double> theta, std::span<double> out)>;
/// Calmness modulus of the integrand at theta given the proposal value psi there.
using CalmnessAFn = std::function<double(std::span<const double> theta, double psi)>;

/// A stochastic program with closed-form ground truth.
struct ProblemInstance {
  std::string name;
  std::size_t dim_x = 0;
  std::size_t dim_theta = 0;
  Box domain;
  SupportRegion theta_support;
  /// Integration region used by ground-truth checks (equals Theta when bounded).
  Box integration_box;
  bool integration_truncated = false;

  Density reference_proposal = Density::gaussian({0.0}, {1.0});
  Point anchor;
  double true_optimum = 0.0;
  std::vector<Point> true_solution_set;

  /// Integral of the Lipschitz modulus; a Lipschitz constant of the objective.
  double alpha_integral = 0.0;
  /// sup over theta of lipschitz_alpha / reference_proposal.
  double alpha_ratio_bound = 0.0;

  IntegrandFn integrand;
  IntegrandBatchFn integrand_batch;
  ScalarFn true_objective;
  ScalarFn lipschitz_alpha;  // over theta
  ScalarFn envelope_beta;    // over x, for the reference proposal
  ScalarFn calmness_V;       // over x
  CalmnessAFn calmness_A;
  ScalarFn reference_second_moment;  // x -> integral of F(x,.)^2 / reference_proposal

  double F(std::span<const double> x, std::span<const double> theta) const;
  void F_batch(const PointSet& xs, std::span<const double> theta, std::span<double> out) const;
  double f(std::span<const double> x) const;
  double beta(std::span<const double> x) const;
  double alpha(std::span<const double> theta) const;
  double V(std::span<const double> x) const;
  double A(std::span<const double> theta, double psi) const;

  /// Second-moment limit at the anchor under the reference proposal.
  double second_moment_limit() const;

  /// Throws InputError if a mandatory closed form is missing or inconsistent.
  void validate() const;
};

using ProblemPtr = std::shared_ptr<const ProblemInstance>;

std::vector<std::string> builtin_problem_names();
std::vector<std::string> problem_template_names();

ProblemInstance builtin_problem(const std::string& name);
/// {"template": name, "params": {...}}; unknown names raise LookupError.
ProblemInstance problem_from_json(const nlohmann::json& spec);

struct VerificationReport {
  std::string problem;
  bool passed = true;
  double max_abs_objective_error = 0.0;
  Point worst_x;
  double optimum_gap = 0.0;        // true_optimum - min over the grid (must be <= 0)
  double solution_max_error = 0.0; // max |f(x*) - true_optimum|
  std::size_t grid_points = 0;
  bool integration_truncated = false;
  std::vector<std::string> notes;
  std::vector<std::string> failures;
  nlohmann::json to_json() const;
};

/// Checks the closed forms against numerical quadrature on a grid over the domain.
VerificationReport verify_ground_truth(const ProblemInstance& p, std::size_t grid_points = 101);

}  // namespace amis
