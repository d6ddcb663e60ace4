#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "amis/problem.hpp"
#include "amis/sampler.hpp"

namespace amis {

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  double theta_n = 0.0;
  double scaled_gap = 0.0;  // sqrt(n) * (theta_n - true optimum)
  Point minimizer;
  bool converged = true;
};

struct ReplicateOptions {
  int budget = 4000;
  double tol = 1e-8;
  unsigned threads = 1;
};

struct ReplicationSet {
  std::vector<ReplicationResult> results;  // sorted by seed
  std::vector<std::string> warnings;
  double nonconverged_fraction = 0.0;
  std::vector<double> gaps() const;
};

/// R independent chains; replication r uses seed base_seed + r.
ReplicationSet replicate(const ProblemPtr& p, const AdaptionPolicy& policy, std::int64_t n, int R,
                         std::uint64_t base_seed, const ReplicateOptions& opt = {});

struct KsReport {
  double statistic = 0.0;
  double critical_value = 0.0;
  std::size_t R = 0;
  bool passed = false;
  nlohmann::json to_json() const;
};

/// Kolmogorov-Smirnov test of the sample against N(0, sigma2) at the 1% level.
KsReport normality_test(const std::vector<double>& sample, double sigma2);

enum class VarianceMode { B3, B3_prime };

struct VarianceModel {
  VarianceMode mode = VarianceMode::B3;
  double c_tilde = 0.0;
  double f_anchor = 0.0;
  double scale_anchor = 0.0;  // calmness scale or objective at the anchor
  ProblemPtr problem;
  bool c_tilde_estimated = false;

  /// c_tilde - f(anchor)^2
  double base() const { return c_tilde - f_anchor * f_anchor; }
  double sigma2(std::span<const double> x) const;
};

/// Limit variance model; uses the analytic second moment unless `c_tilde` is supplied.
VarianceModel variance_model(const ProblemPtr& p, VarianceMode mode, std::optional<double> c_tilde = std::nullopt);

/// (1/n) sum (F(anchor, theta_i)/psi_i)^2 along one chain.
double estimate_c_tilde(const ProblemPtr& p, const AdaptionPolicy& policy, std::int64_t n, std::uint64_t seed);

struct CltDiagnostics {
  std::string label = "empirical";
  std::vector<std::int64_t> n_schedule;
  std::vector<double> quadratic_variation;
  double qv_slope = 0.0;  // log-log slope of |qv_n - reference| along the schedule
  std::vector<double> lindeberg_eps{0.1, 0.5, 1.0};
  std::vector<std::vector<double>> lindeberg;  // [eps][n]
  std::vector<double> a6_path;
  std::vector<double> b3_path;
  std::vector<double> ratio_oscillation_path;
  double envelope_L = 0.0;
  double qv_limit = 0.0;  // NaN when not analytic
  bool qv_converged = false;
  bool lindeberg_zero_beyond_envelope = true;
  std::size_t lindeberg_checked = 0;
  bool a6_bounded = false;
  double a6_growth_ratio = 0.0;
  bool b3_to_zero = false;
  bool ratio_oscillation_to_zero = false;
  std::vector<std::string> notes;
  nlohmann::json to_json() const;
};

CltDiagnostics clt_conditions(const ProblemPtr& p, const AdaptionPolicy& policy,
                              const std::vector<std::int64_t>& n_schedule, std::uint64_t seed);

struct DecayReport {
  std::vector<std::int64_t> n_schedule;
  std::vector<double> median;
  std::vector<double> q95;
  bool passed = true;
  nlohmann::json to_json() const;
};

/// Distribution of sqrt(n) |theta_n - inf over the solution set of f_n| along a schedule.
DecayReport op_small_check(const ProblemPtr& p, const AdaptionPolicy& policy,
                           const std::vector<std::int64_t>& n_schedule, int R, std::uint64_t seed,
                           const ReplicateOptions& opt = {});

}  // namespace amis
