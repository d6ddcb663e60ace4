#include <doctest.h>

#include <cmath>

#include "amis/asymptotics.hpp"
#include "amis/errors.hpp"

using namespace amis;

namespace {

ProblemPtr shared(const std::string& name) { return std::make_shared<const ProblemInstance>(builtin_problem(name)); }

std::vector<double> normal_sample(std::size_t R, double sd, std::uint64_t seed) {
  RngStream r(seed);
  std::vector<double> v(R);
  for (auto& x : v) x = sd * r.normal();
  return v;
}

}  // namespace

TEST_CASE("KS statistic on tiny samples") {
  const auto one = normality_test({0.0}, 1.0);
  CHECK(one.statistic == doctest::Approx(0.5));
  const auto two = normality_test({-1.0, 1.0}, 1.0);
  // max of |i/R - Phi| around the two jumps
  const double phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  CHECK(two.statistic == doctest::Approx(std::max(phi1 - 0.5, 1.0 - phi1)));
  CHECK(two.critical_value == doctest::Approx(1.63 / std::sqrt(2.0)));
}

TEST_CASE("KS accepts the right law and rejects an inflated variance") {
  const auto s = normal_sample(2000, std::sqrt(0.7), 12);
  CHECK(normality_test(s, 0.7).passed);
  CHECK_FALSE(normality_test(s, 4.0 * 0.7).passed);
  CHECK_THROWS_AS(normality_test(s, 0.0), InputError);
}

TEST_CASE("limit variance for the separable gaussian problem") {
  const auto p = shared("quad_gauss_1d");
  const auto vm = variance_model(p, VarianceMode::B3);
  const std::vector<double> xhat{0.3};
  // c(x) - f(x)^2 with c(x) = g(x)^2 * s / sqrt(2 - 1/s^2), s = 2
  const double g = 1.0;
  const double expected = g * g * (2.0 / std::sqrt(2.0 - 0.25) - 1.0);
  CHECK(vm.sigma2(xhat) == doctest::Approx(expected).epsilon(1e-12));
  const auto vm2 = variance_model(p, VarianceMode::B3_prime);
  CHECK(vm2.sigma2(xhat) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(variance_model(p, VarianceMode::B3, 0.1), PreconditionError);
}

TEST_CASE("estimated second moment converges to the analytic one") {
  const auto q = shared("quad_gauss_1d");
  const double cq = estimate_c_tilde(q, make_policy(*q, PolicyKind::fixed), 1000000, 8);
  CHECK(cq == doctest::Approx(q->second_moment_limit()).epsilon(0.01));
  const auto p = shared("xdep_density_1d");
  const double est = estimate_c_tilde(p, make_policy(*p, PolicyKind::fixed), 400000, 3);
  CHECK(est == doctest::Approx(p->second_moment_limit()).epsilon(0.03));
}

TEST_CASE("replication is independent of the thread count") {
  const auto p = shared("xdep_density_1d");
  const auto pol = make_policy(*p, PolicyKind::defensive_mixture);
  const auto a = replicate(p, pol, 256, 100, 40, {4000, 1e-8, 1});
  const auto b = replicate(p, pol, 256, 100, 40, {4000, 1e-8, 4});
  REQUIRE(a.results.size() == 100);
  for (std::size_t r = 0; r < 100; ++r) {
    CHECK(a.results[r].seed == 40 + r);
    CHECK(a.results[r].theta_n == b.results[r].theta_n);
  }
  CHECK_THROWS_AS(replicate(p, pol, 256, 10, 1), InputError);
  CHECK_THROWS_AS(replicate(p, pol, 10, 100, 1), InputError);
}

TEST_CASE("condition surrogates on bounded fixtures") {
  for (const std::string name : {"abs_uniform_1d", "quad_gauss_1d", "xdep_density_1d"}) {
    CAPTURE(name);
    const auto p = shared(name);
    const auto d = clt_conditions(p, make_policy(*p, PolicyKind::fixed), {1000, 100000, 1000000}, 5);
    CHECK(d.lindeberg_checked > 0);
    CHECK(d.lindeberg_zero_beyond_envelope);
    CHECK(d.a6_bounded);
    CHECK(d.qv_converged);
    if (std::isfinite(d.qv_limit)) CHECK(d.quadratic_variation.back() == doctest::Approx(d.qv_limit).epsilon(0.1));
  }
  const auto q = shared("quad_gauss_1d");
  const auto d = clt_conditions(q, make_policy(*q, PolicyKind::fixed), {100, 1000}, 5);
  CHECK(d.ratio_oscillation_to_zero);
  for (double v : d.ratio_oscillation_path) CHECK(v < 1e-20);
}

TEST_CASE("exploding variance breaks the envelope") {
  const auto p = shared("quad_gauss_1d");
  const auto d = clt_conditions(p, make_policy(*p, PolicyKind::exploding_variance, 100), {200, 2000}, 5);
  CHECK(std::isinf(d.envelope_L));
  CHECK(d.lindeberg_checked == 0);
  CHECK_FALSE(d.a6_bounded);
}

TEST_CASE("optimal-value gap decays") {
  const auto p = shared("xdep_density_1d");
  const auto rep = op_small_check(p, make_policy(*p, PolicyKind::fixed), {256, 1024}, 60, 9);
  CHECK(rep.median.size() == 2);
  CHECK(rep.median[0] >= 0.0);
}
