#include "amis/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "amis/errors.hpp"
#include "amis/estimator.hpp"

namespace amis {

namespace {

void check_bk(const TailBoundSpec& s) {
  if (!(s.b > 0.0) || !std::isfinite(s.b)) throw InputError("tail bound: b must be positive");
  if (!(s.k > 0.0) || !std::isfinite(s.k)) throw InputError("tail bound: k must be positive");
  if (s.n < 1) throw InputError("tail bound: n must be at least 1");
}

double xlogy_ratio(double p, double q) { return p == 0.0 ? 0.0 : p * std::log(p / q); }

}  // namespace

void TailBoundSpec::validate() const {
  check_bk(*this);
  if (!(epsilon > 0.0 && epsilon < b)) throw PreconditionError("tail bound: epsilon must lie in (0, b)");
}

double relative_entropy(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("relative entropy: p must lie in [0,1]");
  if (!(q > 0.0 && q < 1.0)) throw InputError("relative entropy: q must lie in (0,1)");
  return std::max(0.0, xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q));
}

double log_bennett_mgf_bound(const TailBoundSpec& s, double lambda) {
  check_bk(s);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("MGF bound: lambda must be non-negative");
  const double b2 = s.b * s.b;
  // log of (b^2 e^{-lambda k / b} + k e^{lambda b}) / (b^2 + k), kept stable for large lambda
  const double u = -lambda * s.k / s.b + std::log(b2);
  const double v = lambda * s.b + std::log(s.k);
  const double hi = std::max(u, v);
  const double inner = hi + std::log(std::exp(u - hi) + std::exp(v - hi)) - std::log(b2 + s.k);
  return static_cast<double>(s.n) * inner;
}

double bennett_mgf_bound(const TailBoundSpec& s, double lambda) { return std::exp(log_bennett_mgf_bound(s, lambda)); }

double tail_rate(const TailBoundSpec& s) {
  s.validate();
  const double den = s.b * s.b + s.k;
  return relative_entropy((s.b * s.epsilon + s.k) / den, s.k / den);
}

double tail_bound(const TailBoundSpec& s) { return std::exp(-static_cast<double>(s.n) * tail_rate(s)); }

double optimal_lambda(const TailBoundSpec& s) {
  s.validate();
  return s.b / (s.b * s.b + s.k) * std::log(s.b * (s.b * s.epsilon + s.k) / (s.k * (s.b - s.epsilon)));
}

PointwiseBound two_sided_pointwise_bound(const ProblemInstance& p, std::span<const double> x, double epsilon,
                                         std::int64_t n, double domination) {
  const Envelope env = envelope(p, x, domination);
  PointwiseBound out;
  out.b = env.L;
  out.k = env.C;
  if (!(epsilon > 0.0 && epsilon < env.L)) {
    std::ostringstream os;
    os << "pointwise bound: epsilon must lie in (0, b(x)) with b(x) = " << env.L;
    throw PreconditionError(os.str());
  }
  const TailBoundSpec spec{env.L, env.C, epsilon, n};
  out.rate = tail_rate(spec);
  out.one_sided = std::exp(-static_cast<double>(n) * out.rate);
  out.two_sided = std::min(1.0, 2.0 * out.one_sided);
  return out;
}

Covering covering(const Box& box, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("covering: delta must be positive");
  const std::size_t m = box.dim();
  if (m == 0) throw InputError("covering: empty box");
  Covering c;
  c.box = box;
  c.delta = delta;
  const double h = 2.0 * delta / std::sqrt(static_cast<double>(m));
  for (std::size_t d = 0; d < m; ++d) {
    const double cells = std::ceil(box[d].width() / h - 1e-12);
    c.per_dim.push_back(static_cast<std::size_t>(std::max(1.0, cells)));
  }
  std::size_t total = 1;
  for (auto k : c.per_dim) total *= k;
  c.centers = PointSet(m);
  Point x(m);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t d = 0; d < m; ++d) {
      const std::size_t j = rem % c.per_dim[d];
      rem /= c.per_dim[d];
      x[d] = box[d].lo + (static_cast<double>(j) + 0.5) * box[d].width() / static_cast<double>(c.per_dim[d]);
    }
    c.centers.push_back(x);
  }
  return c;
}

ModulusOfContinuity ModulusOfContinuity::lipschitz(double scale) { return holder(scale, 1.0); }

ModulusOfContinuity ModulusOfContinuity::holder(double scale, double exponent) {
  if (!(scale >= 0.0) || !(exponent > 0.0)) throw InputError("modulus: need scale >= 0 and exponent > 0");
  return {[scale, exponent](double d) { return scale * std::pow(d, exponent); }};
}

double ModulusOfContinuity::inverse(double level) const {
  if (fn(1.0) <= level) {
    double hi = 1.0;
    while (fn(hi * 2.0) <= level && hi < 1e300) hi *= 2.0;
    if (hi >= 1e300) return std::numeric_limits<double>::infinity();
    double lo = hi;
    hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fn(mid) <= level ? lo : hi) = mid;
    }
    return lo;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fn(mid) <= level ? lo : hi) = mid;
  }
  return lo;
}

CalmnessSpec CalmnessSpec::with_threshold(double k_hat, std::function<double(double)> M, ModulusOfContinuity modulus) {
  if (!(k_hat > 0.0) || !std::isfinite(k_hat)) throw InputError("calmness: k_hat must be positive");
  CalmnessSpec c;
  c.k_hat = k_hat;
  c.b_hat = k_hat * k_hat;
  c.M = std::move(M);
  c.modulus = std::move(modulus);
  return c;
}

double CalmnessSpec::xi(double epsilon) const { return epsilon * M(epsilon) - k_hat; }

double CalmnessSpec::tau(double epsilon) const {
  if (!(epsilon > 0.0)) throw InputError("calmness: epsilon must be positive");
  const double x = xi(epsilon);
  if (!(x > 0.0)) throw PreconditionError("calmness: need epsilon*M(epsilon) > k_hat");
  if (!(x < b_hat)) throw PreconditionError("calmness: need epsilon*M(epsilon) - k_hat < b_hat");
  const double den = b_hat * b_hat + k_hat;
  return relative_entropy((b_hat * x + k_hat) / den, k_hat / den);
}

CalmnessSpec calmness_for(const ProblemInstance& p, double domination, double xi_fraction) {
  if (!std::isfinite(domination) || !(domination > 0.0))
    throw CapabilityError("calmness: policy has no finite domination bound");
  if (!(xi_fraction > 0.0 && xi_fraction < 1.0)) throw InputError("calmness: xi_fraction must lie in (0,1)");
  const double raw = std::max(p.alpha_ratio_bound * domination, 1e-300);
  const double xi = xi_fraction;
  return CalmnessSpec::with_threshold(
      1.0, [xi](double eps) { return (1.0 + xi) / eps; }, ModulusOfContinuity::lipschitz(raw));
}

double calmness_bound(const CalmnessSpec& c, double epsilon, std::int64_t n) {
  if (n < 1) throw InputError("calmness bound: n must be at least 1");
  return std::exp(-static_cast<double>(n) * c.tau(epsilon));
}

double max_admissible_delta(const ProblemInstance& p, const CalmnessSpec& c, double epsilon) {
  double d = c.modulus.inverse(1.0 / c.M(epsilon / 4.0));
  if (p.alpha_integral > 0.0) d = std::min(d, epsilon / (4.0 * p.alpha_integral));
  return d;
}

UniformBound uniform_bound(const ProblemInstance& p, const Covering& cover, const CalmnessSpec& calm, double epsilon,
                           std::int64_t n, double domination, bool two_sided) {
  if (!(epsilon > 0.0)) throw InputError("uniform bound: epsilon must be positive");
  if (n < 1) throw InputError("uniform bound: n must be at least 1");
  if (!(cover.box == p.domain)) throw InputError("uniform bound: covering is not built on the decision domain");
  const double delta = cover.delta;
  if (calm.modulus(delta) > 1.0 / calm.M(epsilon / 4.0))
    throw PreconditionError("uniform bound: need modulus(delta) <= 1/M(epsilon/4)");
  if (p.alpha_integral * delta > epsilon / 4.0)
    throw PreconditionError("uniform bound: need objective Lipschitz constant * delta <= epsilon/4");

  UniformBound out;
  out.two_sided = two_sided;
  double min_b = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cover.size(); ++j) min_b = std::min(min_b, envelope(p, cover.centers[j], domination).L);
  if (!(epsilon / 2.0 < min_b)) throw PreconditionError("uniform bound: need epsilon/2 < min_j b(x_j)");

  out.dominant_rate = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t j = 0; j < cover.size(); ++j) {
    const PointwiseBound pb = two_sided_pointwise_bound(p, cover.centers[j], epsilon / 2.0, n, domination);
    const double term = two_sided ? 2.0 * pb.one_sided : pb.one_sided;
    out.center_terms.push_back(term);
    out.dominant_rate = std::min(out.dominant_rate, pb.rate);
    total += term;
  }
  const double tau = calm.tau(epsilon / 4.0);
  out.calmness_term = std::exp(-static_cast<double>(n) * tau);
  out.dominant_rate = std::min(out.dominant_rate, tau);
  out.raw = total + out.calmness_term;
  out.value = std::min(1.0, out.raw);
  return out;
}

}  // namespace amis
