#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "amis/geometry.hpp"
#include "amis/problem.hpp"

namespace amis {

/// Bounded-increment martingale tail setting: increments bounded by b,
/// conditional variances by k, n terms, threshold epsilon.
struct TailBoundSpec {
  double b = 1.0;
  double k = 1.0;
  double epsilon = 0.5;
  std::int64_t n = 1;

  /// Checks b, k > 0, n >= 1 and 0 < epsilon < b.
  void validate() const;
};

/// Bernoulli relative entropy p ln(p/q) + (1-p) ln((1-p)/(1-q)).
double relative_entropy(double p, double q);

/// Moment-generating-function bound of the sum at lambda >= 0.
double bennett_mgf_bound(const TailBoundSpec& s, double lambda);
double log_bennett_mgf_bound(const TailBoundSpec& s, double lambda);

/// Exponent rate r with tail bound exp(-n r).
double tail_rate(const TailBoundSpec& s);
/// Bound on P(S_n >= n epsilon).
double tail_bound(const TailBoundSpec& s);
/// Minimiser over lambda of exp(-lambda n epsilon) times the MGF bound.
double optimal_lambda(const TailBoundSpec& s);

struct PointwiseBound {
  double b = 0.0;
  double k = 0.0;
  double rate = 0.0;
  double one_sided = 0.0;
  double two_sided = 0.0;  // min(1, 2 * one_sided)
};

/// Bound on P(|f_n(x) - f(x)| >= epsilon). `domination` scales the envelope
/// for policies whose proposals are not the reference one.
PointwiseBound two_sided_pointwise_bound(const ProblemInstance& p, std::span<const double> x,
                                         double epsilon, std::int64_t n, double domination = 1.0);

/// Cell-centred grid whose points are within delta (Euclidean) of every point of the box.
struct Covering {
  Box box;
  double delta = 0.0;
  std::vector<std::size_t> per_dim;
  PointSet centers;
  std::size_t size() const noexcept { return centers.size(); }
};

Covering covering(const Box& box, double delta);

/// Modulus of continuity; zero at zero and non-decreasing.
struct ModulusOfContinuity {
  std::function<double(double)> fn;
  double operator()(double d) const { return fn(d); }
  static ModulusOfContinuity lipschitz(double scale);
  static ModulusOfContinuity holder(double scale, double exponent);
  /// Largest d with modulus(d) <= level (bisection).
  double inverse(double level) const;
};

/// Calmness setting: normalised increments bounded by k_hat, square bound b_hat = k_hat^2,
/// threshold function M and modulus.
struct CalmnessSpec {
  double k_hat = 1.0;
  double b_hat = 1.0;
  std::function<double(double)> M;
  ModulusOfContinuity modulus = ModulusOfContinuity::lipschitz(1.0);

  static CalmnessSpec with_threshold(double k_hat, std::function<double(double)> M,
                                     ModulusOfContinuity modulus = ModulusOfContinuity::lipschitz(1.0));
  double xi(double epsilon) const;
  double tau(double epsilon) const;
};

/// Calmness setting for a problem under a policy with the given domination factor.
/// The raw calmness constant is absorbed into the modulus so that k_hat = 1.
CalmnessSpec calmness_for(const ProblemInstance& p, double domination = 1.0, double xi_fraction = 0.5);

/// Bound on the probability that the averaged calmness increments reach epsilon * M(epsilon).
double calmness_bound(const CalmnessSpec& c, double epsilon, std::int64_t n);

struct UniformBound {
  double value = 0.0;  // clipped to [0,1]
  double raw = 0.0;
  std::vector<double> center_terms;
  double calmness_term = 0.0;
  double dominant_rate = 0.0;
  bool two_sided = true;
};

/// Largest covering radius admissible for a uniform bound at epsilon.
double max_admissible_delta(const ProblemInstance& p, const CalmnessSpec& c, double epsilon);

/// Bound on P(sup_x |H_n(x)| >= epsilon) (or the one-sided sup when two_sided is false).
UniformBound uniform_bound(const ProblemInstance& p, const Covering& cover, const CalmnessSpec& calm,
                           double epsilon, std::int64_t n, double domination = 1.0, bool two_sided = true);

}  // namespace amis
