#include "amis/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "amis/errors.hpp"
#include "amis/estimator.hpp"
#include "amis/numeric.hpp"
#include "amis/optimizer.hpp"
#include "amis/parallel.hpp"

namespace amis {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void check_schedule(const std::vector<std::int64_t>& s) {
  if (s.empty()) throw InputError("n_schedule must not be empty");
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 1) throw InputError("n_schedule entries must be positive");
    if (k > 0 && s[k] <= s[k - 1]) throw InputError("n_schedule must be increasing");
  }
}

}  // namespace

std::vector<double> ReplicationSet::gaps() const {
  std::vector<double> g;
  g.reserve(results.size());
  for (const auto& r : results) g.push_back(r.scaled_gap);
  return g;
}

ReplicationSet replicate(const ProblemPtr& p, const AdaptionPolicy& policy, std::int64_t n, int R,
                         std::uint64_t base_seed, const ReplicateOptions& opt) {
  if (n < 64) throw InputError("replicate: n must be at least 64");
  if (R < 100) throw InputError("replicate: R must be at least 100");
  ReplicationSet set;
  set.results.resize(static_cast<std::size_t>(R));
  const double root_n = std::sqrt(static_cast<double>(n));
  parallel_for(set.results.size(), opt.threads, [&](std::size_t r) {
    const std::uint64_t seed = base_seed + r;
    Sampler sampler(policy, RngStream(seed));
    sampler.run(static_cast<std::size_t>(n));
    const Estimator est(p, sampler.history());
    const OptimizationResult o = minimize(est, opt.budget, opt.tol);
    ReplicationResult& out = set.results[r];
    out.seed = seed;
    out.n = n;
    out.theta_n = o.theta_n;
    out.scaled_gap = root_n * (o.theta_n - p->true_optimum);
    out.minimizer = o.minimizers.front();
    out.converged = o.converged;
  });
  std::size_t bad = 0;
  for (const auto& r : set.results) bad += r.converged ? 0 : 1;
  set.nonconverged_fraction = static_cast<double>(bad) / static_cast<double>(R);
  if (set.nonconverged_fraction > 0.01) {
    std::ostringstream os;
    os << "optimizer did not converge in " << bad << " of " << R << " replications";
    set.warnings.push_back(os.str());
  }
  return set;
}

json KsReport::to_json() const {
  return json{{"statistic", statistic}, {"critical_value", critical_value}, {"R", R}, {"passed", passed}};
}

KsReport normality_test(const std::vector<double>& sample, double sigma2) {
  if (sample.empty()) throw InputError("normality test: empty sample");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("normality test: sigma2 must be positive");
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double sd = std::sqrt(sigma2);
  const double R = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = std_normal_cdf(s[i] / sd);
    d = std::max({d, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
  }
  KsReport rep;
  rep.statistic = d;
  rep.R = s.size();
  rep.critical_value = 1.63 / std::sqrt(R);
  rep.passed = d < rep.critical_value;
  return rep;
}

double VarianceModel::sigma2(std::span<const double> x) const {
  double ratio;
  if (mode == VarianceMode::B3) {
    ratio = problem->V(x) / scale_anchor;
  } else {
    ratio = problem->f(x) / scale_anchor;
  }
  return base() * ratio * ratio;
}

VarianceModel variance_model(const ProblemPtr& p, VarianceMode mode, std::optional<double> c_tilde) {
  VarianceModel vm;
  vm.mode = mode;
  vm.problem = p;
  vm.f_anchor = p->f(p->anchor);
  vm.c_tilde_estimated = c_tilde.has_value();
  vm.c_tilde = c_tilde ? *c_tilde : p->second_moment_limit();
  if (mode == VarianceMode::B3) {
    vm.scale_anchor = p->V(p->anchor);
    if (!(vm.scale_anchor > 0.0)) throw CapabilityError("variance model: calmness scale vanishes at the anchor");
  } else {
    const PointSet grid = tensor_grid(p->domain, nodes_per_side(101, p->dim_x));
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (p->f(grid[j]) == 0.0) throw CapabilityError("variance model: objective vanishes on the check grid");
    vm.scale_anchor = vm.f_anchor;
  }
  if (vm.base() < 0.0) throw PreconditionError("variance model: need c_tilde >= f(anchor)^2");
  return vm;
}

double estimate_c_tilde(const ProblemPtr& p, const AdaptionPolicy& policy, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("estimate_c_tilde: n must be positive");
  Sampler sampler(policy, RngStream(seed), false);
  Point theta(p->dim_theta);
  double psi = 0.0;
  NeumaierSum s;
  for (std::int64_t i = 0; i < n; ++i) {
    sampler.step(theta, psi);
    const double w = p->F(p->anchor, theta) / psi;
    s.add(w * w);
  }
  return s.value() / static_cast<double>(n);
}

json CltDiagnostics::to_json() const {
  json lind = json::object();
  for (std::size_t e = 0; e < lindeberg_eps.size(); ++e) {
    std::ostringstream key;
    key << lindeberg_eps[e];
    lind[key.str()] = lindeberg[e];
  }
  return json{{"label", label},
              {"n_schedule", n_schedule},
              {"quadratic_variation", quadratic_variation},
              {"quadratic_variation_limit", nan_safe(qv_limit)},
              {"quadratic_variation_slope", nan_safe(qv_slope)},
              {"quadratic_variation_converged", qv_converged},
              {"lindeberg", lind},
              {"envelope_L", nan_safe(envelope_L)},
              {"lindeberg_zero_beyond_envelope", lindeberg_zero_beyond_envelope},
              {"lindeberg_pairs_checked", lindeberg_checked},
              {"a6_path", a6_path},
              {"a6_growth_ratio", nan_safe(a6_growth_ratio)},
              {"a6_bounded", a6_bounded},
              {"b3_path", b3_path},
              {"b3_to_zero", b3_to_zero},
              {"ratio_oscillation_path", ratio_oscillation_path},
              {"ratio_oscillation_to_zero", ratio_oscillation_to_zero},
              {"notes", notes}};
}

CltDiagnostics clt_conditions(const ProblemPtr& p, const AdaptionPolicy& policy,
                              const std::vector<std::int64_t>& n_schedule, std::uint64_t seed) {
  check_schedule(n_schedule);
  CltDiagnostics d;
  d.n_schedule = n_schedule;
  d.notes.push_back("surrogates use realized values in place of conditional expectations");
  const auto n_max = static_cast<std::size_t>(n_schedule.back());
  const double f0 = p->f(p->anchor);
  const double dom = domination_factor(policy, p->reference_proposal);
  d.envelope_L = std::isfinite(dom) ? envelope(*p, p->anchor, dom).L : std::numeric_limits<double>::infinity();
  const bool fixed_ref = policy.kind == PolicyKind::fixed && policy.initial_proposal == p->reference_proposal;
  d.qv_limit = fixed_ref && p->reference_second_moment ? p->second_moment_limit() - f0 * f0 : kNaN;

  const PointSet grid = tensor_grid(p->domain, nodes_per_side(101, p->dim_x));
  std::vector<double> fgrid(grid.size());
  bool f_nonzero = true;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    fgrid[j] = p->f(grid[j]);
    f_nonzero = f_nonzero && fgrid[j] != 0.0;
  }
  if (!f_nonzero) d.notes.push_back("objective vanishes on the grid; ratio oscillation not reported");

  Sampler sampler(policy, RngStream(seed), false);
  std::vector<double> ups;
  ups.reserve(n_max);
  NeumaierSum qv, a6, b3, osc;
  Point theta(p->dim_theta);
  std::vector<double> buf(grid.size());
  double psi = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 1; i <= n_max; ++i) {
    sampler.step(theta, psi);
    const double u = p->F(p->anchor, theta) / psi - f0;
    ups.push_back(u);
    qv.add(u * u);
    if (p->lipschitz_alpha) {
      const double s = p->alpha(theta) / psi + p->alpha_integral;
      a6.add(s * s);
    }
    if (p->calmness_A) {
      const double a = p->A(theta, psi) / psi;
      b3.add(a * a);
    }
    if (f_nonzero) {
      p->F_batch(grid, theta, buf);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double r = buf[j] / (fgrid[j] * psi);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      osc.add((hi - lo) * (hi - lo));
    }
    if (i == static_cast<std::size_t>(n_schedule[next])) {
      const double n = static_cast<double>(i);
      d.quadratic_variation.push_back(qv.value() / n);
      d.a6_path.push_back(a6.value() / n);
      d.b3_path.push_back(b3.value() / n);
      d.ratio_oscillation_path.push_back(f_nonzero ? osc.value() / n : kNaN);
      ++next;
    }
  }

  d.lindeberg.assign(d.lindeberg_eps.size(), {});
  for (std::size_t e = 0; e < d.lindeberg_eps.size(); ++e) {
    for (auto n_i : n_schedule) {
      const double thr = d.lindeberg_eps[e] * std::sqrt(static_cast<double>(n_i));
      NeumaierSum s;
      for (std::int64_t i = 0; i < n_i; ++i) {
        const double u = ups[static_cast<std::size_t>(i)];
        if (std::fabs(u) > thr) s.add(u * u);
      }
      const double v = s.value() / static_cast<double>(n_i);
      d.lindeberg[e].push_back(v);
      if (thr > d.envelope_L) {
        ++d.lindeberg_checked;
        if (v != 0.0) d.lindeberg_zero_beyond_envelope = false;
      }
    }
  }

  const std::size_t K = n_schedule.size();
  const double ref = std::isfinite(d.qv_limit) ? d.qv_limit : d.quadratic_variation.back();
  if (K >= 2) {
    const double a = d.quadratic_variation[K - 2], b = d.quadratic_variation[K - 1];
    d.qv_converged = std::fabs(a - b) < 0.02 * std::max(std::fabs(a), std::fabs(b));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const double diff = std::fabs(d.quadratic_variation[k] - ref);
      if (!(diff > 0.0)) continue;
      const double x = std::log(static_cast<double>(n_schedule[k])), y = std::log(diff);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++cnt;
    }
    d.qv_slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : kNaN;
    d.a6_growth_ratio = d.a6_path.back() / d.a6_path.front();
    d.a6_bounded = d.a6_growth_ratio <= 4.0;
    d.b3_to_zero = d.b3_path.back() <= 0.5 * d.b3_path.front();
    d.ratio_oscillation_to_zero =
        f_nonzero && (d.ratio_oscillation_path.back() <= 0.5 * d.ratio_oscillation_path.front() ||
                      d.ratio_oscillation_path.back() < 1e-20);
  } else {
    d.qv_slope = kNaN;
    d.a6_growth_ratio = 1.0;
    d.a6_bounded = std::isfinite(d.a6_path.back());
    d.notes.push_back("schedule has one entry; convergence flags are not assessed");
  }
  return d;
}

json DecayReport::to_json() const {
  return json{{"n_schedule", n_schedule}, {"median", median}, {"q95", q95}, {"passed", passed}};
}

DecayReport op_small_check(const ProblemPtr& p, const AdaptionPolicy& policy,
                           const std::vector<std::int64_t>& n_schedule, int R, std::uint64_t seed,
                           const ReplicateOptions& opt) {
  check_schedule(n_schedule);
  if (R < 1) throw InputError("op_small_check: R must be positive");
  if (p->true_solution_set.empty()) throw InputError("op_small_check: solution set must be finite and non-empty");
  const std::size_t K = n_schedule.size();
  std::vector<std::vector<double>> vals(K, std::vector<double>(static_cast<std::size_t>(R)));
  parallel_for(static_cast<std::size_t>(R), opt.threads, [&](std::size_t r) {
    Sampler sampler(policy, RngStream(seed + r), false);
    Estimator est(p);
    Point theta(p->dim_theta);
    double psi = 0.0;
    std::int64_t done = 0;
    for (std::size_t k = 0; k < K; ++k) {
      for (; done < n_schedule[k]; ++done) {
        sampler.step(theta, psi);
        est.append(theta, psi);
      }
      const OptimizationResult o = minimize(est, opt.budget, opt.tol);
      const double inf_t = inf_over_set(est, p->true_solution_set);
      vals[k][r] = std::sqrt(static_cast<double>(done)) * std::fabs(o.theta_n - inf_t);
    }
  });
  DecayReport rep;
  rep.n_schedule = n_schedule;
  for (std::size_t k = 0; k < K; ++k) {
    rep.median.push_back(quantile(vals[k], 0.5));
    rep.q95.push_back(quantile(vals[k], 0.95));
  }
  for (std::size_t k = 1; k < K; ++k) {
    if (rep.median[k] > 1.1 * rep.median[k - 1] + 1e-12) rep.passed = false;
    if (rep.q95[k] > 1.1 * rep.q95[k - 1] + 1e-12) rep.passed = false;
  }
  return rep;
}

}  // namespace amis
