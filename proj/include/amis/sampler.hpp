#pragma once

#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "amis/density.hpp"
#include "amis/numeric.hpp"
#include "amis/problem.hpp"
#include "amis/rng.hpp"

namespace amis {

enum class PolicyKind { fixed, moment_matching, defensive_mixture, exploding_variance };

std::string policy_kind_name(PolicyKind k);
PolicyKind policy_kind_from_name(const std::string& name);

/// Rule producing the next proposal from the past draws.
struct AdaptionPolicy {
  PolicyKind kind = PolicyKind::fixed;
  int update_period = 100;
  double defensive_weight = 0.5;
  Density initial_proposal = Density::gaussian({0.0}, {1.0});
  /// Optional importance target for the moment updates; equal weights when empty.
  ScalarFn target;

  void validate() const;
  nlohmann::json to_json() const;
  /// Reads kind/update_period/defensive_weight/initial_proposal; `fallback` is used
  /// when no initial proposal is given.
  static AdaptionPolicy from_json(const nlohmann::json& j, const Density& fallback);
};

/// Policy targeting |F(anchor, .)| of a problem, starting from its reference proposal.
AdaptionPolicy make_policy(const ProblemInstance& p, PolicyKind kind, int update_period = 100,
                           double defensive_weight = 0.5);

/// sup over every proposal the policy can emit of reference/proposal. +inf if unbounded.
double domination_factor(const AdaptionPolicy& policy, const Density& reference);

struct SampleRecord {
  std::size_t index = 0;  // 1-based
  Point theta;
  double proposal_density_value = 0.0;
  DensityPtr proposal_snapshot;
};

/// Draw history in structure-of-arrays form.
class History {
 public:
  explicit History(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return psi_.size(); }
  std::span<const double> theta(std::size_t i) const { return {thetas_.data() + i * dim_, dim_}; }
  double psi(std::size_t i) const { return psi_[i]; }
  const DensityPtr& proposal(std::size_t i) const { return proposals_[proposal_index_[i]]; }
  std::size_t proposal_index(std::size_t i) const { return proposal_index_[i]; }
  const std::vector<DensityPtr>& proposals() const noexcept { return proposals_; }
  SampleRecord record(std::size_t i) const;

  void append(std::span<const double> theta, double psi, const DensityPtr& proposal);
  History prefix(std::size_t count) const;

 private:
  std::size_t dim_;
  std::vector<double> thetas_;
  std::vector<double> psi_;
  std::vector<std::uint32_t> proposal_index_;
  std::vector<DensityPtr> proposals_;
};

/// Adaptive multiple importance sampler.
class Sampler {
 public:
  Sampler(AdaptionPolicy policy, RngStream rng, bool retain_history = true);

  /// Draws one sample from the current proposal and adapts at period boundaries.
  SampleRecord next_sample();
  /// Cheaper variant that skips building a SampleRecord.
  void step(std::span<double> theta_out, double& psi_out);
  void run(std::size_t n);

  const History& history() const noexcept { return history_; }
  const AdaptionPolicy& policy() const noexcept { return policy_; }
  const DensityPtr& current_proposal() const noexcept { return current_; }
  std::size_t steps() const noexcept { return steps_; }
  const std::vector<std::string>& adaptation_errors() const noexcept { return adaptation_errors_; }

 private:
  void adapt();

  AdaptionPolicy policy_;
  RngStream rng_;
  bool retain_;
  History history_;
  DensityPtr initial_;
  DensityPtr current_;
  WeightedMoments moments_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
  std::vector<std::string> adaptation_errors_;
};

/// Proposal that the policy assigns to draw `step` (1-based) given the earlier draws.
/// Recomputed from scratch; matches what the sampler used.
Density proposal_for_step(const AdaptionPolicy& policy, const History& history, std::size_t step);

/// F(x, theta_i) / psi_i(theta_i) for every recorded draw.
std::vector<double> weight_stream(const ProblemInstance& p, const History& h, std::span<const double> x);

}  // namespace amis
