#include "amis/estimator.hpp"

#include <cmath>

#include "amis/errors.hpp"

namespace amis {

Envelope envelope(const ProblemInstance& p, std::span<const double> x, double domination) {
  if (!p.domain.contains(x)) throw DomainError("envelope: x lies outside the decision domain");
  if (!(domination > 0.0)) throw InputError("envelope: domination factor must be positive");
  if (!std::isfinite(domination)) throw CapabilityError("envelope: policy has no finite domination bound");
  const double b = p.beta(x) * domination;
  const double af = std::fabs(p.f(x));
  return {b + af, b * (af + 1.0)};
}

Estimator::Estimator(ProblemPtr problem)
    : problem_(std::move(problem)), dim_theta_(problem_->dim_theta), tracked_(problem_->dim_x) {}

Estimator::Estimator(ProblemPtr problem, const History& history) : Estimator(std::move(problem)) {
  if (history.dim() != dim_theta_) throw InputError("estimator: history dimension mismatch");
  thetas_.reserve(history.size() * dim_theta_);
  psi_.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) append(history.theta(i), history.psi(i));
}

void Estimator::check_point(std::span<const double> x) const {
  if (x.size() != problem_->dim_x) throw InputError("estimator: decision dimension mismatch");
  require_finite(x, "decision point");
  if (!problem_->domain.contains(x)) throw DomainError("estimator: x lies outside the decision domain");
}

void Estimator::append(std::span<const double> theta, double psi) {
  if (theta.size() != dim_theta_) throw InputError("estimator: sample dimension mismatch");
  if (!(psi > 0.0) || !std::isfinite(psi)) throw InputError("estimator: proposal value must be positive");
  thetas_.insert(thetas_.end(), theta.begin(), theta.end());
  psi_.push_back(psi);
  if (!tracked_.empty()) {
    problem_->F_batch(tracked_, theta, buf_);
    for (std::size_t k = 0; k < tracked_.size(); ++k) {
      const double w = buf_[k] / psi;
      sums_[k].add(w);
      squares_[k].add((w - tracked_f_[k]) * (w - tracked_f_[k]));
    }
  }
}

void Estimator::track(std::span<const double> x) {
  check_point(x);
  for (std::size_t k = 0; k < tracked_.size(); ++k)
    if (sup_norm_distance(tracked_[k], x) == 0.0) return;
  const double fx = problem_->f(x);
  NeumaierSum s, q;
  for (std::size_t i = 0; i < psi_.size(); ++i) {
    const double w = problem_->F(x, {thetas_.data() + i * dim_theta_, dim_theta_}) / psi_[i];
    s.add(w);
    q.add((w - fx) * (w - fx));
  }
  tracked_.push_back(x);
  tracked_f_.push_back(fx);
  sums_.push_back(s);
  squares_.push_back(q);
  buf_.resize(tracked_.size());
}

double Estimator::recompute_fn(std::span<const double> x) const {
  check_point(x);
  if (psi_.empty()) throw InputError("estimator: no samples yet");
  NeumaierSum s;
  for (std::size_t i = 0; i < psi_.size(); ++i)
    s.add(problem_->F(x, {thetas_.data() + i * dim_theta_, dim_theta_}) / psi_[i]);
  return s.value() / static_cast<double>(psi_.size());
}

double Estimator::evaluate_fn(std::span<const double> x) const {
  check_point(x);
  if (psi_.empty()) throw InputError("estimator: no samples yet");
  for (std::size_t k = 0; k < tracked_.size(); ++k)
    if (sup_norm_distance(tracked_[k], x) == 0.0) return sums_[k].value() / static_cast<double>(psi_.size());
  return recompute_fn(x);
}

DeviationSample Estimator::deviation(std::span<const double> x, bool retain_upsilon) const {
  const double fn = evaluate_fn(x);
  DeviationSample d;
  d.x.assign(x.begin(), x.end());
  const double fx = problem_->f(x);
  d.H_n = fn - fx;
  d.S_n = static_cast<double>(n()) * d.H_n;
  if (retain_upsilon) {
    std::vector<double> u(psi_.size());
    for (std::size_t i = 0; i < psi_.size(); ++i)
      u[i] = problem_->F(x, {thetas_.data() + i * dim_theta_, dim_theta_}) / psi_[i] - fx;
    d.upsilon = std::move(u);
  }
  return d;
}

GridProfile Estimator::grid_profile(const PointSet& grid) const {
  if (psi_.empty()) throw InputError("estimator: no samples yet");
  if (grid.dim() != problem_->dim_x) throw InputError("grid_profile: dimension mismatch");
  for (std::size_t j = 0; j < grid.size(); ++j) check_point(grid[j]);
  std::vector<NeumaierSum> sums(grid.size());
  std::vector<double> buf(grid.size());
  for (std::size_t i = 0; i < psi_.size(); ++i) {
    problem_->F_batch(grid, {thetas_.data() + i * dim_theta_, dim_theta_}, buf);
    for (std::size_t j = 0; j < grid.size(); ++j) sums[j].add(buf[j] / psi_[i]);
  }
  GridProfile g;
  g.xs = grid;
  const double n = static_cast<double>(psi_.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double fn = sums[j].value() / n;
    g.f_n.push_back(fn);
    g.H_n.push_back(fn - problem_->f(grid[j]));
    g.sup_abs_H = std::max(g.sup_abs_H, std::fabs(g.H_n.back()));
  }
  return g;
}

double Estimator::tracked_mean_square(std::size_t k) const {
  if (k >= tracked_.size()) throw InputError("estimator: no such tracked point");
  if (psi_.empty()) throw InputError("estimator: no samples yet");
  return squares_[k].value() / static_cast<double>(psi_.size());
}

}  // namespace amis
