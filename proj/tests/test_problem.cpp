#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "amis/errors.hpp"
#include "amis/problem.hpp"

using namespace amis;
using nlohmann::json;
using boost::math::quadrature::gauss_kronrod;

namespace {

// integral over Theta of F(x, .), independent of the library quadrature
double objective_by_quadrature(const ProblemInstance& p, const Point& x) {
  auto in1 = [&](double t) { return p.F(x, std::vector<double>{t}); };
  if (p.dim_theta == 1) {
    if (p.theta_support.kind == SupportRegion::Kind::box)
      return gauss_kronrod<double, 61>::integrate(in1, p.theta_support.box[0].lo, p.theta_support.box[0].hi, 15, 1e-13);
    return gauss_kronrod<double, 61>::integrate(in1, -std::numeric_limits<double>::infinity(),
                                                std::numeric_limits<double>::infinity(), 15, 1e-13);
  }
  auto outer = [&](double t1) {
    auto inner = [&](double t2) { return p.F(x, std::vector<double>{t1, t2}); };
    return gauss_kronrod<double, 31>::integrate(inner, -std::numeric_limits<double>::infinity(),
                                                std::numeric_limits<double>::infinity(), 10, 1e-12);
  };
  return gauss_kronrod<double, 31>::integrate(outer, -std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity(), 10, 1e-12);
}

double second_moment_by_quadrature(const ProblemInstance& p, const Point& x) {
  auto in = [&](double t) {
    const std::vector<double> th{t};
    const double psi = p.reference_proposal.evaluate(th);
    if (psi == 0.0) return 0.0;
    const double v = p.F(x, th);
    return v * v / psi;
  };
  if (p.theta_support.kind == SupportRegion::Kind::box)
    return gauss_kronrod<double, 61>::integrate(in, p.theta_support.box[0].lo, p.theta_support.box[0].hi, 15, 1e-13);
  return gauss_kronrod<double, 61>::integrate(in, -std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity(), 15, 1e-13);
}

std::vector<Point> probe_points(const ProblemInstance& p) {
  std::vector<Point> xs{p.anchor};
  for (const auto& s : p.true_solution_set) xs.push_back(s);
  if (p.dim_x == 1) {
    for (double t : {0.0, 0.1, 0.45, 0.9, 1.0}) xs.push_back({p.domain[0].lo + t * p.domain[0].width()});
  } else {
    xs.push_back({0.0, 0.0});
    xs.push_back({1.0, 0.25});
  }
  return xs;
}

}  // namespace

TEST_CASE("builtin objectives agree with adaptive quadrature") {
  for (const auto& name : problem_template_names()) {
    CAPTURE(name);
    const auto p = builtin_problem(name);
    p.validate();
    for (const auto& x : probe_points(p)) {
      CAPTURE(x[0]);
      CHECK(p.f(x) == doctest::Approx(objective_by_quadrature(p, x)).epsilon(1e-9));
    }
    for (const auto& s : p.true_solution_set) CHECK(p.f(s) == doctest::Approx(p.true_optimum).epsilon(1e-14));
  }
}

TEST_CASE("second moments agree with adaptive quadrature") {
  for (const auto& name : problem_template_names()) {
    const auto p = builtin_problem(name);
    if (p.dim_theta != 1) continue;
    CAPTURE(name);
    for (const auto& x : probe_points(p))
      CHECK(p.reference_second_moment(x) == doctest::Approx(second_moment_by_quadrature(p, x)).epsilon(1e-8));
  }
}

TEST_CASE("envelope beta is the supremum of the weight") {
  for (const auto& name : problem_template_names()) {
    const auto p = builtin_problem(name);
    if (p.dim_theta != 1) continue;
    CAPTURE(name);
    for (const auto& x : probe_points(p)) {
      double m = 0.0;
      for (int k = 0; k <= 200000; ++k) {
        const std::vector<double> th{-15.0 + 30.0 * k / 200000.0};
        const double psi = p.reference_proposal.evaluate(th);
        if (psi > 0.0) m = std::max(m, std::fabs(p.F(x, th)) / psi);
      }
      CHECK(p.beta(x) >= m * (1 - 1e-12));
      CHECK(p.beta(x) <= m * 1.001);
    }
  }
}

TEST_CASE("lipschitz modulus and calmness modulus hold at random points") {
  std::mt19937_64 gen(5);
  for (const auto& name : problem_template_names()) {
    const auto p = builtin_problem(name);
    CAPTURE(name);
    RngStream rng(9);
    for (int trial = 0; trial < 2000; ++trial) {
      Point x(p.dim_x), y(p.dim_x);
      for (std::size_t d = 0; d < p.dim_x; ++d) {
        std::uniform_real_distribution<double> U(p.domain[d].lo, p.domain[d].hi);
        x[d] = U(gen);
        y[d] = U(gen);
      }
      const Point th = p.reference_proposal.sample(rng);
      double dist = 0.0;
      for (std::size_t d = 0; d < p.dim_x; ++d) dist += (x[d] - y[d]) * (x[d] - y[d]);
      dist = std::sqrt(dist);
      CHECK(std::fabs(p.F(x, th) - p.F(y, th)) <= p.alpha(th) * dist * (1 + 1e-9) + 1e-15);
      CHECK(p.alpha(th) <= p.alpha_ratio_bound * p.reference_proposal.evaluate(th) * (1 + 1e-9));
      const double psi = p.reference_proposal.evaluate(th);
      if (p.V(x) > 0.0) CHECK(std::fabs(p.F(x, th) - p.f(x) * psi) <= p.A(th, psi) * p.V(x) * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST_CASE("ground truth verification passes for every builtin") {
  for (const auto& name : builtin_problem_names()) {
    const auto r = verify_ground_truth(builtin_problem(name));
    CAPTURE(name);
    CHECK(r.passed);
    CHECK(r.max_abs_objective_error < 1e-4);
  }
}

TEST_CASE("corrupted closed form fails verification") {
  auto p = builtin_problem("quad_gauss_1d");
  auto f = p.true_objective;
  p.true_objective = [f](std::span<const double> x) { return f(x) + 1e-3; };
  CHECK_FALSE(verify_ground_truth(p).passed);
}

TEST_CASE("problem json templates") {
  const auto p = problem_from_json(json::parse(R"({"template":"quad_gauss_1d","params":{"center":[0.7]}})"));
  CHECK(p.true_solution_set.front()[0] == doctest::Approx(0.7));
  CHECK(p.true_optimum == doctest::Approx(1.0));
  const auto q = problem_from_json(json::parse(R"({"template":"quad_gauss_1d","params":{"center":[1.5]}})"));
  CHECK(q.true_solution_set.front()[0] == doctest::Approx(1.0));
  CHECK(q.true_optimum == doctest::Approx(1.25));
  CHECK_THROWS_AS(problem_from_json(json::parse(R"({"template":"no_such"})")), LookupError);
  CHECK_THROWS_AS(problem_from_json(json::parse(R"({"template":"quad_gauss_1d","params":{"bogus":1}})")), InputError);
  CHECK_THROWS_AS(builtin_problem("nope"), LookupError);
  CHECK(builtin_problem_names().size() == 4);
}

TEST_CASE("missing closed forms raise capability errors") {
  auto p = builtin_problem("quad_gauss_1d");
  p.envelope_beta = nullptr;
  CHECK_THROWS_AS(p.beta(std::vector<double>{0.5}), CapabilityError);
  CHECK_THROWS_AS(p.f(std::vector<double>{0.5, 0.5}), InputError);
}
