#include "amis/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "amis/errors.hpp"
#include "amis/numeric.hpp"

namespace amis {

using nlohmann::json;

// ---- member helpers ----------------------------------------------------------

namespace {

[[noreturn]] void missing(const ProblemInstance& p, const char* what) {
  throw CapabilityError("problem '" + p.name + "' provides no " + what);
}

void check_x(const ProblemInstance& p, std::span<const double> x) {
  if (x.size() != p.dim_x) throw InputError("problem '" + p.name + "': decision dimension mismatch");
}

}  // namespace

double ProblemInstance::F(std::span<const double> x, std::span<const double> theta) const {
  return integrand(x, theta);
}

void ProblemInstance::F_batch(const PointSet& xs, std::span<const double> theta, std::span<double> out) const {
  if (integrand_batch) {
    integrand_batch(xs, theta, out);
    return;
  }
  for (std::size_t j = 0; j < xs.size(); ++j) out[j] = integrand(xs[j], theta);
}

double ProblemInstance::f(std::span<const double> x) const {
  check_x(*this, x);
  return true_objective(x);
}

double ProblemInstance::beta(std::span<const double> x) const {
  if (!envelope_beta) missing(*this, "envelope");
  check_x(*this, x);
  return envelope_beta(x);
}

double ProblemInstance::alpha(std::span<const double> theta) const {
  if (!lipschitz_alpha) missing(*this, "Lipschitz modulus");
  return lipschitz_alpha(theta);
}

double ProblemInstance::V(std::span<const double> x) const {
  if (!calmness_V) missing(*this, "calmness scale");
  check_x(*this, x);
  return calmness_V(x);
}

double ProblemInstance::A(std::span<const double> theta, double psi) const {
  if (!calmness_A) missing(*this, "calmness modulus");
  return calmness_A(theta, psi);
}

double ProblemInstance::second_moment_limit() const {
  if (!reference_second_moment) missing(*this, "second moment");
  return reference_second_moment(anchor);
}

void ProblemInstance::validate() const {
  if (name.empty()) throw InputError("problem: missing name");
  if (dim_x == 0 || dim_theta == 0) throw InputError("problem '" + name + "': dimensions must be positive");
  if (domain.dim() != dim_x) throw InputError("problem '" + name + "': domain dimension mismatch");
  if (theta_support.dim != dim_theta) throw InputError("problem '" + name + "': Theta dimension mismatch");
  if (reference_proposal.dim() != dim_theta)
    throw InputError("problem '" + name + "': reference proposal dimension mismatch");
  if (!integrand) throw InputError("problem '" + name + "': missing integrand");
  if (!true_objective) throw InputError("problem '" + name + "': missing closed-form objective");
  if (!std::isfinite(true_optimum)) throw InputError("problem '" + name + "': missing optimal value");
  if (true_solution_set.empty()) throw InputError("problem '" + name + "': empty solution set");
  for (const auto& s : true_solution_set)
    if (s.size() != dim_x || !domain.contains(s))
      throw InputError("problem '" + name + "': solution point outside the domain");
  if (anchor.size() != dim_x || !domain.contains(anchor))
    throw InputError("problem '" + name + "': anchor must lie in the domain");
}

// ---- templates -------------------------------------------------------------------

namespace {

class Params {
 public:
  Params(const json& j, std::string owner) : j_(j.is_null() ? json::object() : j), owner_(std::move(owner)) {
    if (!j_.is_object()) throw InputError(owner_ + ": params must be an object");
  }
  double num(const std::string& key, double dflt) {
    used_.insert(key);
    if (!j_.contains(key)) return dflt;
    if (!j_.at(key).is_number()) throw InputError(owner_ + ": param '" + key + "' must be a number");
    return j_.at(key).get<double>();
  }
  std::vector<double> vec(const std::string& key, std::vector<double> dflt) {
    used_.insert(key);
    if (!j_.contains(key)) return dflt;
    const auto& v = j_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw InputError(owner_ + ": param '" + key + "' must be a list of numbers");
    return v.get<std::vector<double>>();
  }
  Box box(const std::string& key, Box dflt) {
    used_.insert(key);
    if (!j_.contains(key)) return dflt;
    std::vector<Interval> sides;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw InputError(owner_ + ": param '" + key + "' must be a list of [lo,hi]");
    if (v.size() == 2 && v[0].is_number()) return Box({{v[0].get<double>(), v[1].get<double>()}});
    for (const auto& s : v) {
      if (!s.is_array() || s.size() != 2) throw InputError(owner_ + ": param '" + key + "' must be [lo,hi] pairs");
      sides.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    return Box(std::move(sides));
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw InputError(owner_ + ": unknown param '" + it.key() + "'");
  }

 private:
  json j_;
  std::string owner_;
  std::set<std::string> used_;
};

double gauss_r(std::span<const double> theta) {
  double q = 0.0;
  for (double t : theta) q += t * t;
  return std::exp(-0.5 * q - static_cast<double>(theta.size()) * kLogSqrt2Pi);
}

double max_corner_distance(const Box& box, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t d = 0; d < box.dim(); ++d) {
    const double far = std::max(std::fabs(box[d].lo - c[d]), std::fabs(box[d].hi - c[d]));
    s += far * far;
  }
  return std::sqrt(s);
}

Point resolve_anchor(Params& prm, const Box& domain) {
  Point a = prm.vec("anchor", domain.center());
  if (a.size() != domain.dim()) throw InputError("anchor dimension must match the domain");
  if (!domain.contains(a)) throw InputError("anchor must lie in the domain");
  return a;
}

// calmness modulus computed as a sup over a fine grid of x, inflated slightly
CalmnessAFn grid_calmness_A(const ProblemInstance& p) {
  auto grid = std::make_shared<PointSet>(tensor_grid(p.domain, nodes_per_side(401, p.dim_x)));
  auto fv = std::make_shared<std::vector<double>>();
  auto vv = std::make_shared<std::vector<double>>();
  for (std::size_t j = 0; j < grid->size(); ++j) {
    fv->push_back(p.true_objective((*grid)[j]));
    vv->push_back(p.calmness_V((*grid)[j]));
  }
  IntegrandFn F = p.integrand;
  return [grid, fv, vv, F](std::span<const double> theta, double psi) {
    double m = 0.0;
    for (std::size_t j = 0; j < grid->size(); ++j)
      m = std::max(m, std::fabs(F((*grid)[j], theta) - (*fv)[j] * psi) / (*vv)[j]);
    return 1.02 * m;
  };
}

// F(x, theta) = g(x) * standard gaussian density of theta, reference proposal N(0, s^2 I)
ProblemInstance separable_gaussian(std::string name, Box domain, ScalarFn g, double lip_g, double s,
                                   Point anchor, double optimum, std::vector<Point> solutions) {
  if (!(s >= 1.0) || !std::isfinite(s)) throw InputError(name + ": proposal_scale must be >= 1");
  ProblemInstance p;
  p.name = std::move(name);
  p.dim_x = domain.dim();
  p.dim_theta = domain.dim();
  const std::size_t r = p.dim_theta;
  p.domain = std::move(domain);
  p.theta_support = SupportRegion::everywhere(r);
  p.integration_box = Box(std::vector<Interval>(r, Interval{-8.0, 8.0}));
  p.integration_truncated = true;
  p.reference_proposal = Density::gaussian(Point(r, 0.0), Point(r, s));
  p.anchor = std::move(anchor);
  p.true_optimum = optimum;
  p.true_solution_set = std::move(solutions);

  const double sr = std::pow(s, static_cast<double>(r));
  const double var_factor = std::pow(s / std::sqrt(2.0 - 1.0 / (s * s)), static_cast<double>(r));
  p.alpha_integral = lip_g;
  p.alpha_ratio_bound = lip_g * sr;

  p.integrand = [g](std::span<const double> x, std::span<const double> theta) { return g(x) * gauss_r(theta); };
  p.integrand_batch = [g](const PointSet& xs, std::span<const double> theta, std::span<double> out) {
    const double phi = gauss_r(theta);
    for (std::size_t j = 0; j < xs.size(); ++j) out[j] = g(xs[j]) * phi;
  };
  p.true_objective = g;
  p.lipschitz_alpha = [lip_g](std::span<const double> theta) { return lip_g * gauss_r(theta); };
  p.envelope_beta = [g, sr](std::span<const double> x) { return std::fabs(g(x)) * sr; };
  p.calmness_V = [g](std::span<const double> x) { return std::fabs(g(x)); };
  p.calmness_A = [](std::span<const double> theta, double psi) { return std::fabs(gauss_r(theta) - psi); };
  p.reference_second_moment = [g, var_factor](std::span<const double> x) {
    const double v = g(x);
    return v * v * var_factor;
  };
  return p;
}

ProblemInstance make_quad_gauss(const std::string& tmpl, const json& params) {
  const bool two = tmpl == "quad_gauss_2d";
  Params prm(params, tmpl);
  Box domain = prm.box("domain", two ? Box({{0.0, 1.0}, {0.0, 1.0}}) : Box({{0.0, 1.0}}));
  Point c = prm.vec("center", two ? Point{0.3, 0.6} : Point{0.3});
  const double s = prm.num("proposal_scale", 2.0);
  Point anchor = resolve_anchor(prm, domain);
  prm.finish();
  if (domain.dim() != (two ? 2u : 1u)) throw InputError(tmpl + ": domain has the wrong dimension");
  if (c.size() != domain.dim()) throw InputError(tmpl + ": center dimension must match the domain");
  require_finite(c, "center");

  ScalarFn g = [c](std::span<const double> x) {
    double q = 1.0;
    for (std::size_t d = 0; d < c.size(); ++d) q += (x[d] - c[d]) * (x[d] - c[d]);
    return q;
  };
  const Point star = domain.clamp(c);
  const double lip = 2.0 * max_corner_distance(domain, c);
  return separable_gaussian(tmpl, domain, g, lip, s, anchor, g(star), {star});
}

ProblemInstance make_double_well(const json& params) {
  Params prm(params, "double_well_1d");
  Box domain = prm.box("domain", Box({{0.0, 1.0}}));
  const double a = prm.num("left", 0.25);
  const double b = prm.num("right", 0.75);
  const double h = prm.num("height", 16.0);
  const double s = prm.num("proposal_scale", 2.0);
  Point anchor = resolve_anchor(prm, domain);
  prm.finish();
  if (domain.dim() != 1) throw InputError("double_well_1d: domain must be one-dimensional");
  if (!(a < b) || !(h > 0.0)) throw InputError("double_well_1d: need left < right and height > 0");
  if (!domain.contains(Point{a}) || !domain.contains(Point{b}))
    throw InputError("double_well_1d: both wells must lie in the domain");
  ScalarFn g = [a, b, h](std::span<const double> x) {
    return 1.0 + h * (x[0] - a) * (x[0] - a) * (x[0] - b) * (x[0] - b);
  };
  double lip = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double x = domain[0].lo + domain[0].width() * k / 10000.0;
    lip = std::max(lip, std::fabs(2.0 * h * (x - a) * (x - b) * (2.0 * x - a - b)));
  }
  return separable_gaussian("double_well_1d", domain, g, 1.01 * lip, s, anchor, 1.0, {{a}, {b}});
}

ProblemInstance make_unit_mass(const json& params) {
  Params prm(params, "unit_mass_1d");
  Box domain = prm.box("domain", Box({{0.0, 1.0}}));
  Point anchor = resolve_anchor(prm, domain);
  prm.finish();
  if (domain.dim() != 1) throw InputError("unit_mass_1d: domain must be one-dimensional");
  ScalarFn g = [](std::span<const double>) { return 1.0; };
  return separable_gaussian("unit_mass_1d", domain, g, 0.0, 1.0, anchor, 1.0, {domain.center()});
}

ProblemInstance make_abs_uniform(const json& params) {
  Params prm(params, "abs_uniform_1d");
  Box domain = prm.box("domain", Box({{0.0, 1.0}}));
  Box pbox = prm.box("proposal_box", Box({{-0.25, 1.25}}));
  Point anchor = resolve_anchor(prm, domain);
  prm.finish();
  const Box theta_box({{0.0, 1.0}});
  if (domain.dim() != 1 || !theta_box.contains(domain))
    throw InputError("abs_uniform_1d: domain must be a sub-interval of [0,1]");
  if (pbox.dim() != 1 || !pbox.contains(theta_box))
    throw InputError("abs_uniform_1d: proposal_box must contain [0,1]");

  ProblemInstance p;
  p.name = "abs_uniform_1d";
  p.dim_x = p.dim_theta = 1;
  p.domain = domain;
  p.theta_support = SupportRegion::boxed(theta_box);
  p.integration_box = theta_box;
  p.reference_proposal = Density::uniform_box(pbox);
  p.anchor = anchor;
  const double width = pbox[0].width();

  auto obj = [](std::span<const double> x) { return x[0] * x[0] - x[0] + 0.5; };
  const Point star = domain.clamp(Point{0.5});
  p.true_optimum = obj(star);
  p.true_solution_set = {star};
  p.alpha_integral = 1.0;
  p.alpha_ratio_bound = width;

  p.integrand = [](std::span<const double> x, std::span<const double> th) {
    return (th[0] >= 0.0 && th[0] <= 1.0) ? std::fabs(x[0] - th[0]) : 0.0;
  };
  p.integrand_batch = [](const PointSet& xs, std::span<const double> th, std::span<double> out) {
    const bool inside = th[0] >= 0.0 && th[0] <= 1.0;
    const auto& c = xs.coords();
    for (std::size_t j = 0; j < c.size(); ++j) out[j] = inside ? std::fabs(c[j] - th[0]) : 0.0;
  };
  p.true_objective = obj;
  p.lipschitz_alpha = [](std::span<const double> th) { return (th[0] >= 0.0 && th[0] <= 1.0) ? 1.0 : 0.0; };
  p.envelope_beta = [width](std::span<const double> x) { return width * std::max(x[0], 1.0 - x[0]); };
  p.reference_second_moment = [width](std::span<const double> x) {
    return width * (x[0] * x[0] - x[0] + 1.0 / 3.0);
  };
  p.calmness_V = [width, obj](std::span<const double> x) {
    const double fx = obj(x);
    return std::sqrt(width * (x[0] * x[0] - x[0] + 1.0 / 3.0) - fx * fx);
  };
  p.calmness_A = grid_calmness_A(p);
  return p;
}

struct XdepModel {
  double a, mu, s;
  double F(double x, double th) const { return (th - a) * (th - a) * std_normal_pdf(th - x); }
  double beta(double x) const {
    const double kappa = 0.5 * (1.0 - 1.0 / (s * s));
    const double m = (x - mu / (s * s)) / (1.0 - 1.0 / (s * s));
    auto q = [&](double t) { return -0.5 * (t - x) * (t - x) + 0.5 * (t - mu) * (t - mu) / (s * s); };
    const double disc = std::sqrt((m - a) * (m - a) + 4.0 / kappa);
    double best = 0.0;
    for (double t : {0.5 * (m + a + disc), 0.5 * (m + a - disc)})
      best = std::max(best, (t - a) * (t - a) * std::exp(q(t)));
    return s * best;
  }
  double second_moment(double x) const {
    const double P = 1.0 - 0.5 / (s * s);
    const double m2 = (2.0 * x - mu / (s * s)) / (2.0 - 1.0 / (s * s));
    const double Q = -(m2 - x) * (m2 - x) + 0.5 * (m2 - mu) * (m2 - mu) / (s * s);
    const double v = 0.5 / P;
    const double d = m2 - a;
    const double moment4 = d * d * d * d + 6.0 * d * d * v + 3.0 * v * v;
    return s * kInvSqrt2Pi * std::exp(Q) * std::sqrt(kPi / P) * moment4;
  }
};

// sup over u in [l,h] of |u| phi(u)
double sup_abs_u_phi(double l, double h) {
  double tmin, tmax;
  if (l <= 0.0 && h >= 0.0) {
    tmin = 0.0;
    tmax = std::max(-l, h);
  } else {
    tmin = std::min(std::fabs(l), std::fabs(h));
    tmax = std::max(std::fabs(l), std::fabs(h));
  }
  auto g = [](double t) { return t * std_normal_pdf(t); };
  if (tmin <= 1.0 && tmax >= 1.0) return g(1.0);
  return std::max(g(tmin), g(tmax));
}

ProblemInstance make_xdep(const json& params) {
  Params prm(params, "xdep_density_1d");
  Box domain = prm.box("domain", Box({{0.0, 1.0}}));
  const double a = prm.num("center", 0.3);
  const double mu = prm.num("proposal_mean", 0.5);
  const double s = prm.num("proposal_scale", 2.0);
  Point anchor = resolve_anchor(prm, domain);
  prm.finish();
  if (domain.dim() != 1) throw InputError("xdep_density_1d: domain must be one-dimensional");
  if (!(s > 1.0) || !std::isfinite(s)) throw InputError("xdep_density_1d: proposal_scale must exceed 1");
  const XdepModel model{a, mu, s};
  const double lo = domain[0].lo, hi = domain[0].hi;

  ProblemInstance p;
  p.name = "xdep_density_1d";
  p.dim_x = p.dim_theta = 1;
  p.domain = domain;
  p.theta_support = SupportRegion::everywhere(1);
  p.integration_box = Box({{lo - 9.0, hi + 9.0}});
  p.integration_truncated = true;
  p.reference_proposal = Density::gaussian({mu}, {s});
  p.anchor = anchor;
  auto obj = [a](std::span<const double> x) { return 1.0 + (x[0] - a) * (x[0] - a); };
  const Point star = domain.clamp(Point{a});
  p.true_optimum = obj(star);
  p.true_solution_set = {star};

  p.integrand = [model](std::span<const double> x, std::span<const double> th) { return model.F(x[0], th[0]); };
  p.integrand_batch = [a](const PointSet& xs, std::span<const double> th, std::span<double> out) {
    const double c = (th[0] - a) * (th[0] - a);
    const auto& xc = xs.coords();
    for (std::size_t j = 0; j < xc.size(); ++j) out[j] = c * std_normal_pdf(th[0] - xc[j]);
  };
  p.true_objective = obj;
  p.lipschitz_alpha = [a, lo, hi](std::span<const double> th) {
    return (th[0] - a) * (th[0] - a) * sup_abs_u_phi(th[0] - hi, th[0] - lo);
  };
  p.envelope_beta = [model](std::span<const double> x) { return model.beta(x[0]); };
  p.reference_second_moment = [model](std::span<const double> x) { return model.second_moment(x[0]); };
  p.calmness_V = [model, obj](std::span<const double> x) {
    const double fx = obj(x);
    return std::sqrt(model.second_moment(x[0]) - fx * fx);
  };

  NeumaierSum integral;
  double ratio = 0.0;
  const double step = 1e-3;
  for (int k = -40000; k <= 40000; ++k) {
    const double t = k * step;
    const Point th{t};
    const double al = p.lipschitz_alpha(th);
    integral.add((k == -40000 || k == 40000 ? 0.5 : 1.0) * al * step);
    ratio = std::max(ratio, al / p.reference_proposal.evaluate(th));
  }
  p.alpha_integral = integral.value();
  p.alpha_ratio_bound = 1.01 * ratio;
  p.calmness_A = grid_calmness_A(p);
  return p;
}

}  // namespace

std::vector<std::string> builtin_problem_names() {
  return {"quad_gauss_1d", "quad_gauss_2d", "abs_uniform_1d", "xdep_density_1d"};
}

std::vector<std::string> problem_template_names() {
  auto v = builtin_problem_names();
  v.push_back("double_well_1d");
  v.push_back("unit_mass_1d");
  return v;
}

ProblemInstance problem_from_json(const json& spec) {
  if (!spec.is_object()) throw InputError("problem file: expected a JSON object");
  if (!spec.contains("template") || !spec.at("template").is_string())
    throw InputError("problem file: missing template name");
  const auto tmpl = spec.at("template").get<std::string>();
  const json params = spec.contains("params") ? spec.at("params") : json::object();
  ProblemInstance p;
  if (tmpl == "quad_gauss_1d" || tmpl == "quad_gauss_2d")
    p = make_quad_gauss(tmpl, params);
  else if (tmpl == "abs_uniform_1d")
    p = make_abs_uniform(params);
  else if (tmpl == "xdep_density_1d")
    p = make_xdep(params);
  else if (tmpl == "double_well_1d")
    p = make_double_well(params);
  else if (tmpl == "unit_mass_1d")
    p = make_unit_mass(params);
  else
    throw LookupError("unknown problem template '" + tmpl + "'");
  if (spec.contains("name")) p.name = spec.at("name").get<std::string>();
  p.validate();
  return p;
}

ProblemInstance builtin_problem(const std::string& name) {
  return problem_from_json(json{{"template", name}});
}

// ---- verification ---------------------------------------------------------------

json VerificationReport::to_json() const {
  return json{{"problem", problem},
              {"passed", passed},
              {"max_abs_objective_error", max_abs_objective_error},
              {"worst_x", worst_x},
              {"optimum_gap", optimum_gap},
              {"solution_max_error", solution_max_error},
              {"grid_points", grid_points},
              {"integration_truncated", integration_truncated},
              {"notes", notes},
              {"failures", failures}};
}

VerificationReport verify_ground_truth(const ProblemInstance& p, std::size_t grid_points) {
  if (grid_points < 11) throw InputError("verify: grid_points must be at least 11");
  VerificationReport rep;
  rep.problem = p.name;
  rep.integration_truncated = p.integration_truncated;
  const PointSet grid = tensor_grid(p.domain, nodes_per_side(grid_points, p.dim_x));
  rep.grid_points = grid.size();

  // trapezoid rule over the integration box
  const std::size_t r = p.dim_theta;
  const std::size_t nodes = r == 1 ? 20001 : (r == 2 ? 801 : 81);
  std::vector<std::vector<double>> axis(r), wts(r);
  for (std::size_t d = 0; d < r; ++d) {
    const auto& side = p.integration_box[d];
    const double h = side.width() / static_cast<double>(nodes - 1);
    for (std::size_t k = 0; k < nodes; ++k) {
      axis[d].push_back(k + 1 == nodes ? side.hi : side.lo + h * static_cast<double>(k));
      wts[d].push_back((k == 0 || k + 1 == nodes) ? 0.5 * h : h);
    }
  }
  std::size_t total = 1;
  for (std::size_t d = 0; d < r; ++d) total *= nodes;

  std::vector<NeumaierSum> sums(grid.size());
  std::vector<double> buf(grid.size());
  Point theta(r);
  bool blown = false;
  for (std::size_t k = 0; k < total && !blown; ++k) {
    std::size_t rem = k;
    double w = 1.0;
    for (std::size_t d = 0; d < r; ++d) {
      const std::size_t i = rem % nodes;
      rem /= nodes;
      theta[d] = axis[d][i];
      w *= wts[d][i];
    }
    p.F_batch(grid, theta, buf);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (!std::isfinite(buf[j])) {
        std::ostringstream os;
        os << "integrand is not finite at theta[0]=" << theta[0];
        rep.failures.push_back(os.str());
        blown = true;
        break;
      }
      sums[j].add(w * buf[j]);
    }
  }

  double grid_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double fx = p.f(grid[j]);
    grid_min = std::min(grid_min, fx);
    const double err = std::fabs(sums[j].value() - fx);
    if (!blown && err >= rep.max_abs_objective_error) {
      rep.max_abs_objective_error = err;
      rep.worst_x = grid.point(j);
    }
  }
  if (rep.max_abs_objective_error >= 1e-4) {
    std::ostringstream os;
    os << "objective closed form disagrees with quadrature by " << rep.max_abs_objective_error;
    rep.failures.push_back(os.str());
  }
  if (p.integration_truncated)
    rep.notes.push_back("Theta is unbounded; quadrature truncated to the integration box");

  rep.optimum_gap = p.true_optimum - grid_min;
  if (rep.optimum_gap > 1e-12) rep.failures.push_back("true optimum exceeds the objective on the grid");
  for (const auto& s : p.true_solution_set) {
    if (!p.domain.contains(s)) rep.failures.push_back("solution point lies outside the domain");
    rep.solution_max_error = std::max(rep.solution_max_error, std::fabs(p.f(s) - p.true_optimum));
  }
  if (rep.solution_max_error > 1e-10)
    rep.failures.push_back("solution set does not attain the true optimum");

  if (p.reference_second_moment) {
    const double fa = p.f(p.anchor);
    const double gap = p.second_moment_limit() - fa * fa;
    if (gap < -1e-12)
      rep.failures.push_back("second-moment limit is below the squared objective at the anchor");
    else if (gap <= 1e-12)
      rep.notes.push_back("degenerate: second-moment limit equals the squared objective at the anchor");
  }
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace amis
