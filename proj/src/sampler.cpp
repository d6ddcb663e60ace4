#include "amis/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amis/errors.hpp"

namespace amis {

using nlohmann::json;

namespace {

constexpr double kVarianceFloor = 1e-8;
constexpr double kExplodeFactor = 2.0;
constexpr double kMaxScale = 1e100;

struct Adapted {
  std::optional<Density> density;
  std::string error;
};

Adapted adapted_from_moments(const AdaptionPolicy& pol, const WeightedMoments& mom, std::size_t updates) {
  const Density& init = pol.initial_proposal;
  if (pol.kind == PolicyKind::fixed) return {init, {}};
  if (pol.kind == PolicyKind::exploding_variance) {
    Point scale = init.scale();
    const double factor = std::min(kMaxScale, std::pow(kExplodeFactor, static_cast<double>(updates)));
    for (double& s : scale) s = std::min(kMaxScale, s * factor);
    return {Density::gaussian(init.mean(), scale), {}};
  }
  if (mom.count() == 0 || !(mom.total_weight() > 0.0))
    return {std::nullopt, "no positive adaptation weights"};
  Point mean = mom.mean();
  const auto var = mom.variance();
  Point scale(var.size());
  for (std::size_t d = 0; d < var.size(); ++d) {
    if (!(var[d] >= kVarianceFloor) || !std::isfinite(var[d]))
      return {std::nullopt, "weighted variance fell below the floor"};
    scale[d] = std::sqrt(var[d]);
  }
  Density adapted = Density::gaussian({0.0}, {1.0});
  if (init.support().kind == SupportRegion::Kind::box) {
    const Box& box = init.support().box;
    mean = box.clamp(mean);
    try {
      adapted = Density::truncated_gaussian(mean, scale, box);
    } catch (const InputError& e) {
      return {std::nullopt, e.what()};
    }
  } else {
    adapted = Density::gaussian(mean, scale);
  }
  if (pol.kind == PolicyKind::moment_matching) return {adapted, {}};
  const double w = pol.defensive_weight;
  return {Density::mixture({w, 1.0 - w}, {init, adapted}), {}};
}

double moment_weight(const AdaptionPolicy& pol, std::span<const double> theta, double psi) {
  if (!pol.target) return 1.0;
  return std::fabs(pol.target(theta)) / psi;
}

bool uses_moments(PolicyKind k) {
  return k == PolicyKind::moment_matching || k == PolicyKind::defensive_mixture;
}

}  // namespace

std::string policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::fixed: return "fixed";
    case PolicyKind::moment_matching: return "moment_matching";
    case PolicyKind::defensive_mixture: return "defensive_mixture";
    case PolicyKind::exploding_variance: return "exploding_variance";
  }
  return "unknown";
}

PolicyKind policy_kind_from_name(const std::string& name) {
  for (auto k : {PolicyKind::fixed, PolicyKind::moment_matching, PolicyKind::defensive_mixture,
                 PolicyKind::exploding_variance})
    if (policy_kind_name(k) == name) return k;
  throw LookupError("unknown adaptation policy '" + name + "'");
}

void AdaptionPolicy::validate() const {
  if (update_period < 1) throw InputError("policy: update_period must be at least 1");
  if (kind == PolicyKind::defensive_mixture && !(defensive_weight > 0.0 && defensive_weight < 1.0))
    throw InputError("policy: defensive_weight must lie in (0,1)");
  if (kind == PolicyKind::exploding_variance && initial_proposal.family() != Density::Family::gaussian)
    throw InputError("policy: exploding_variance needs a gaussian initial proposal");
}

json AdaptionPolicy::to_json() const {
  return json{{"kind", policy_kind_name(kind)},
              {"update_period", update_period},
              {"defensive_weight", defensive_weight},
              {"initial_proposal", initial_proposal.to_json()}};
}

AdaptionPolicy AdaptionPolicy::from_json(const json& j, const Density& fallback) {
  AdaptionPolicy p;
  p.initial_proposal = fallback;
  if (j.is_string()) {
    p.kind = policy_kind_from_name(j.get<std::string>());
  } else {
    if (!j.is_object()) throw InputError("policy: expected a name or an object");
    p.kind = policy_kind_from_name(j.value("kind", std::string("fixed")));
    p.update_period = j.value("update_period", 100);
    p.defensive_weight = j.value("defensive_weight", 0.5);
    if (j.contains("initial_proposal")) p.initial_proposal = Density::from_json(j.at("initial_proposal"));
  }
  p.validate();
  return p;
}

AdaptionPolicy make_policy(const ProblemInstance& p, PolicyKind kind, int update_period, double defensive_weight) {
  AdaptionPolicy pol;
  pol.kind = kind;
  pol.update_period = update_period;
  pol.defensive_weight = defensive_weight;
  pol.initial_proposal = p.reference_proposal;
  const Point anchor = p.anchor;
  const IntegrandFn F = p.integrand;
  pol.target = [anchor, F](std::span<const double> theta) { return F(anchor, theta); };
  pol.validate();
  return pol;
}

double domination_factor(const AdaptionPolicy& policy, const Density& reference) {
  switch (policy.kind) {
    case PolicyKind::fixed:
      return density_ratio_bound(reference, policy.initial_proposal);
    case PolicyKind::defensive_mixture:
      return density_ratio_bound(reference, policy.initial_proposal) / policy.defensive_weight;
    default:
      return std::numeric_limits<double>::infinity();
  }
}

// ---- history ---------------------------------------------------------------------

SampleRecord History::record(std::size_t i) const {
  auto t = theta(i);
  return SampleRecord{i + 1, Point(t.begin(), t.end()), psi_[i], proposal(i)};
}

void History::append(std::span<const double> theta, double psi, const DensityPtr& proposal) {
  if (theta.size() != dim_) throw InputError("history: dimension mismatch");
  if (proposals_.empty() || proposals_.back() != proposal) proposals_.push_back(proposal);
  thetas_.insert(thetas_.end(), theta.begin(), theta.end());
  psi_.push_back(psi);
  proposal_index_.push_back(static_cast<std::uint32_t>(proposals_.size() - 1));
}

History History::prefix(std::size_t count) const {
  History h(dim_);
  for (std::size_t i = 0; i < std::min(count, size()); ++i) h.append(theta(i), psi_[i], proposal(i));
  return h;
}

// ---- sampler ---------------------------------------------------------------------

Sampler::Sampler(AdaptionPolicy policy, RngStream rng, bool retain_history)
    : policy_(std::move(policy)),
      rng_(rng),
      retain_(retain_history),
      history_(policy_.initial_proposal.dim()),
      moments_(policy_.initial_proposal.dim()) {
  policy_.validate();
  initial_ = std::make_shared<const Density>(policy_.initial_proposal);
  current_ = initial_;
}

void Sampler::adapt() {
  ++updates_;
  Adapted a = adapted_from_moments(policy_, moments_, updates_);
  if (!a.density) {
    adaptation_errors_.push_back("step " + std::to_string(steps_) + ": " + a.error);
    current_ = initial_;
    return;
  }
  current_ = std::make_shared<const Density>(std::move(*a.density));
}

void Sampler::step(std::span<double> theta, double& psi) {
  const DensityPtr prop = current_;
  prop->sample(rng_, theta);
  psi = prop->evaluate(theta);
  if (!(psi > 0.0) || !std::isfinite(psi))
    throw AdaptationError("proposal density is not positive at its own draw");
  ++steps_;
  if (retain_) history_.append(theta, psi, prop);
  if (uses_moments(policy_.kind)) moments_.add(theta, moment_weight(policy_, theta, psi));
  if (policy_.kind != PolicyKind::fixed && steps_ % static_cast<std::size_t>(policy_.update_period) == 0) adapt();
}

SampleRecord Sampler::next_sample() {
  SampleRecord r;
  r.index = steps_ + 1;
  r.proposal_snapshot = current_;
  r.theta.resize(history_.dim());
  step(r.theta, r.proposal_density_value);
  return r;
}

void Sampler::run(std::size_t n) {
  Point theta(history_.dim());
  double psi = 0.0;
  for (std::size_t i = 0; i < n; ++i) step(theta, psi);
}

Density proposal_for_step(const AdaptionPolicy& policy, const History& history, std::size_t step) {
  if (step == 0) throw InputError("proposal_for_step: steps are 1-based");
  const auto period = static_cast<std::size_t>(policy.update_period);
  const std::size_t updates = policy.kind == PolicyKind::fixed ? 0 : (step - 1) / period;
  if (updates == 0) return policy.initial_proposal;
  const std::size_t used = updates * period;
  if (history.size() < used) throw InputError("proposal_for_step: history is too short");
  WeightedMoments mom(history.dim());
  if (uses_moments(policy.kind))
    for (std::size_t i = 0; i < used; ++i) mom.add(history.theta(i), moment_weight(policy, history.theta(i), history.psi(i)));
  Adapted a = adapted_from_moments(policy, mom, updates);
  return a.density ? *a.density : policy.initial_proposal;
}

std::vector<double> weight_stream(const ProblemInstance& p, const History& h, std::span<const double> x) {
  if (x.size() != p.dim_x) throw InputError("weight_stream: decision dimension mismatch");
  std::vector<double> w(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) w[i] = p.F(x, h.theta(i)) / h.psi(i);
  return w;
}

}  // namespace amis
