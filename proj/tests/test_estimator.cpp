#include <doctest.h>

#include <cmath>

#include "amis/errors.hpp"
#include "amis/estimator.hpp"

using namespace amis;

TEST_CASE("estimator matches a direct weighted average") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("xdep_density_1d"));
  Sampler s(make_policy(*p, PolicyKind::defensive_mixture, 50), RngStream(5));
  s.run(2000);
  const Estimator est(p, s.history());
  for (double x : {0.0, 0.3, 0.77, 1.0}) {
    const std::vector<double> xv{x};
    double direct = 0.0;
    for (std::size_t i = 0; i < s.history().size(); ++i)
      direct += p->F(xv, s.history().theta(i)) / s.history().psi(i);
    direct /= 2000.0;
    CHECK(est.evaluate_fn(xv) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(est.recompute_fn(xv) == est.evaluate_fn(xv));
    const auto dev = est.deviation(xv, true);
    CHECK(dev.H_n == doctest::Approx(direct - p->f(xv)).epsilon(1e-12));
    CHECK(dev.S_n == doctest::Approx(2000.0 * dev.H_n).epsilon(1e-12));
    REQUIRE(dev.upsilon);
    double su = 0.0;
    for (double u : *dev.upsilon) su += u;
    CHECK(su == doctest::Approx(dev.S_n).epsilon(1e-9));
  }
}

TEST_CASE("tracked sums agree with full recomputation") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("abs_uniform_1d"));
  Estimator est(p);
  est.track(std::vector<double>{0.2});
  est.track(std::vector<double>{0.5});
  Sampler s(make_policy(*p, PolicyKind::fixed), RngStream(6));
  for (int i = 0; i < 1000; ++i) est.append(s.next_sample());
  CHECK(est.n() == 1000);
  CHECK(est.tracked_count() == 2);
  for (double x : {0.2, 0.5}) {
    const std::vector<double> xv{x};
    CHECK(est.evaluate_fn(xv) == doctest::Approx(est.recompute_fn(xv)).epsilon(1e-14));
  }
}

TEST_CASE("grid profile reproduces pointwise values") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("quad_gauss_2d"));
  Sampler s(make_policy(*p, PolicyKind::fixed), RngStream(7));
  s.run(500);
  const Estimator est(p, s.history());
  const auto g = tensor_grid(p->domain, 6);
  const auto prof = est.grid_profile(g);
  double sup = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(prof.f_n[j] == doctest::Approx(est.evaluate_fn(g[j])).epsilon(1e-13));
    CHECK(prof.H_n[j] == doctest::Approx(prof.f_n[j] - p->f(g[j])).epsilon(1e-12));
    sup = std::max(sup, std::fabs(prof.H_n[j]));
  }
  CHECK(prof.sup_abs_H == doctest::Approx(sup));
}

TEST_CASE("estimator is unbiased under the fixed policy") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("quad_gauss_1d"));
  const std::vector<double> x{0.8};
  const int R = 400, n = 200;
  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < R; ++r) {
    Sampler s(make_policy(*p, PolicyKind::fixed), RngStream(1000 + r));
    s.run(n);
    const double h = Estimator(p, s.history()).deviation(x).H_n;
    mean += h;
    m2 += h * h;
  }
  mean /= R;
  const double sd = std::sqrt(m2 / R - mean * mean);
  CHECK(std::fabs(mean) < 4.0 * sd / std::sqrt(R));
  // variance of one chain equals (c(x) - f(x)^2) / n
  const double var_theory = (p->reference_second_moment(x) - p->f(x) * p->f(x)) / n;
  CHECK(sd * sd == doctest::Approx(var_theory).epsilon(0.2));
}

TEST_CASE("estimator errors") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("quad_gauss_1d"));
  Estimator est(p);
  CHECK_THROWS_AS(est.evaluate_fn(std::vector<double>{0.5}), InputError);
  est.append(std::vector<double>{0.1}, 0.2);
  CHECK_THROWS_AS(est.evaluate_fn(std::vector<double>{1.5}), DomainError);
  CHECK_THROWS_AS(est.evaluate_fn(std::vector<double>{0.5, 0.5}), InputError);
  CHECK_THROWS_AS(est.append(std::vector<double>{0.1}, 0.0), InputError);
}
