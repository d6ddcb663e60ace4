#include "amis/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amis/errors.hpp"
#include "amis/numeric.hpp"

namespace amis {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_mean_scale(const Point& mean, const Point& scale) {
  if (mean.empty()) throw InputError("density: dimension must be positive");
  if (mean.size() != scale.size()) throw InputError("density: mean and scale dimensions differ");
  require_finite(mean, "density mean");
  for (double s : scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw InputError("density: scale entries must be positive");
}

// sup over t in [lo,hi] of N(t; ma, sa) / N(t; mb, sb)
double gaussian_ratio_sup_1d(double ma, double sa, double mb, double sb, double lo, double hi) {
  const double c2 = -0.5 / (sa * sa) + 0.5 / (sb * sb);
  auto log_ratio = [&](double t) {
    return std::log(sb / sa) - 0.5 * (t - ma) * (t - ma) / (sa * sa) +
           0.5 * (t - mb) * (t - mb) / (sb * sb);
  };
  const bool finite = std::isfinite(lo) && std::isfinite(hi);
  double best = -kInf;
  if (finite) best = std::max(log_ratio(lo), log_ratio(hi));
  if (c2 < 0.0) {
    const double vertex = (ma / (sa * sa) - mb / (sb * sb)) / (1.0 / (sa * sa) - 1.0 / (sb * sb));
    best = std::max(best, log_ratio(std::clamp(vertex, lo, hi)));
  } else if (!finite) {
    if (c2 > 0.0 || ma != mb) return kInf;
    best = log_ratio(0.0);
  }
  return std::exp(best);
}

double gaussian_min_on_interval(double m, double s, double lo, double hi) {
  const double far = std::fabs(lo - m) > std::fabs(hi - m) ? lo : hi;
  return std_normal_pdf((far - m) / s) / s;
}

}  // namespace

Density Density::gaussian(Point mean, Point scale) {
  check_mean_scale(mean, scale);
  Density d;
  d.family_ = Family::gaussian;
  d.dim_ = mean.size();
  d.support_ = SupportRegion::everywhere(d.dim_);
  d.log_norm_ = -static_cast<double>(d.dim_) * kLogSqrt2Pi;
  for (double s : scale) d.log_norm_ -= std::log(s);
  d.mean_ = std::move(mean);
  d.scale_ = std::move(scale);
  return d;
}

Density Density::uniform_box(Box box) {
  if (box.dim() == 0) throw InputError("uniform box: dimension must be positive");
  Density d;
  d.family_ = Family::uniform_box;
  d.dim_ = box.dim();
  d.log_norm_ = -std::log(box.volume());
  d.support_ = SupportRegion::boxed(std::move(box));
  return d;
}

Density Density::truncated_gaussian(Point mean, Point scale, Box box) {
  check_mean_scale(mean, scale);
  if (box.dim() != mean.size()) throw InputError("truncated gaussian: box dimension mismatch");
  Density d;
  d.family_ = Family::truncated_gaussian;
  d.dim_ = mean.size();
  d.log_norm_ = -static_cast<double>(d.dim_) * kLogSqrt2Pi;
  d.lo_z_.resize(d.dim_);
  d.hi_z_.resize(d.dim_);
  for (std::size_t k = 0; k < d.dim_; ++k) {
    d.lo_z_[k] = (box[k].lo - mean[k]) / scale[k];
    d.hi_z_[k] = (box[k].hi - mean[k]) / scale[k];
    const double mass = std_normal_interval_mass(d.lo_z_[k], d.hi_z_[k]);
    if (!(mass > 0.0)) throw InputError("truncated gaussian: box carries no mass");
    d.log_norm_ -= std::log(scale[k]) + std::log(mass);
  }
  d.mean_ = std::move(mean);
  d.scale_ = std::move(scale);
  d.support_ = SupportRegion::boxed(std::move(box));
  return d;
}

Density Density::mixture(std::vector<double> weights, std::vector<Density> components) {
  if (components.empty() || weights.size() != components.size())
    throw InputError("mixture: need one weight per component");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("mixture: weights must be non-negative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InputError("mixture: weights must sum to 1");
  const std::size_t dim = components.front().dim();
  for (const auto& c : components)
    if (c.dim() != dim) throw InputError("mixture: component dimensions differ");

  const SupportRegion* cover = nullptr;
  for (const auto& c : components) {
    bool all = true;
    for (const auto& o : components) all = all && c.support().covers(o.support());
    if (all) {
      cover = &c.support();
      break;
    }
  }
  if (!cover) throw InputError("mixture: no component support covers the others");

  Density d;
  bool all_gaussian = true;
  for (const auto& c : components) all_gaussian = all_gaussian && c.family() == Family::gaussian;
  d.family_ = all_gaussian ? Family::gaussian_mixture : Family::mixture;
  d.dim_ = dim;
  d.support_ = *cover;
  d.weights_ = std::move(weights);
  d.components_ = std::move(components);
  return d;
}

std::string Density::family_name() const {
  switch (family_) {
    case Family::gaussian: return "gaussian";
    case Family::uniform_box: return "uniform_box";
    case Family::gaussian_mixture: return "gaussian_mixture";
    case Family::truncated_gaussian: return "truncated_gaussian";
    case Family::mixture: return "mixture";
  }
  return "unknown";
}

double Density::evaluate_unchecked(std::span<const double> theta) const {
  switch (family_) {
    case Family::gaussian: {
      double q = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double z = (theta[k] - mean_[k]) / scale_[k];
        q += z * z;
      }
      return std::exp(log_norm_ - 0.5 * q);
    }
    case Family::uniform_box:
      return support_.box.contains(theta) ? std::exp(log_norm_) : 0.0;
    case Family::truncated_gaussian: {
      if (!support_.box.contains(theta)) return 0.0;
      double q = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        const double z = (theta[k] - mean_[k]) / scale_[k];
        q += z * z;
      }
      return std::exp(log_norm_ - 0.5 * q);
    }
    case Family::gaussian_mixture:
    case Family::mixture: {
      double v = 0.0;
      for (std::size_t c = 0; c < components_.size(); ++c)
        if (weights_[c] > 0.0) v += weights_[c] * components_[c].evaluate_unchecked(theta);
      return v;
    }
  }
  return 0.0;
}

double Density::evaluate(std::span<const double> theta) const {
  if (theta.size() != dim_) throw InputError("density: dimension mismatch");
  require_finite(theta, "density argument");
  return evaluate_unchecked(theta);
}

void Density::sample_unchecked(RngStream& rng, std::span<double> out) const {
  switch (family_) {
    case Family::gaussian:
      for (std::size_t k = 0; k < dim_; ++k) out[k] = mean_[k] + scale_[k] * rng.normal();
      return;
    case Family::uniform_box:
      for (std::size_t k = 0; k < dim_; ++k) {
        const auto& s = support_.box[k];
        out[k] = s.lo + s.width() * rng.uniform();
      }
      return;
    case Family::truncated_gaussian:
      for (std::size_t k = 0; k < dim_; ++k) {
        const double u = rng.uniform();
        double a = lo_z_[k], b = hi_z_[k];
        // sample in the lower tail for accuracy, reflecting if needed
        const bool flip = a > 0.0;
        if (flip) {
          const double t = a;
          a = -b;
          b = -t;
        }
        const double pa = std_normal_cdf(a);
        const double pb = std_normal_cdf(b);
        double p = pa + u * (pb - pa);
        p = std::clamp(p, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
        double z = std::clamp(std_normal_quantile(p), a, b);
        if (flip) z = -z;
        out[k] = std::clamp(mean_[k] + scale_[k] * z, support_.box[k].lo, support_.box[k].hi);
      }
      return;
    case Family::gaussian_mixture:
    case Family::mixture: {
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t pick = components_.size() - 1;
      for (std::size_t c = 0; c < components_.size(); ++c) {
        acc += weights_[c];
        if (u < acc && weights_[c] > 0.0) {
          pick = c;
          break;
        }
      }
      components_[pick].sample_unchecked(rng, out);
      return;
    }
  }
}

void Density::sample(RngStream& rng, std::span<double> out) const {
  if (out.size() != dim_) throw InputError("density sample: output dimension mismatch");
  sample_unchecked(rng, out);
}

Point Density::sample(RngStream& rng) const {
  Point p(dim_);
  sample_unchecked(rng, p);
  return p;
}

bool operator==(const Density& a, const Density& b) {
  return a.family_ == b.family_ && a.dim_ == b.dim_ && a.mean_ == b.mean_ && a.scale_ == b.scale_ &&
         a.support_ == b.support_ && a.weights_ == b.weights_ && a.components_ == b.components_;
}

// ---- JSON -----------------------------------------------------------------

namespace {

json support_to_json(const SupportRegion& s) {
  if (s.kind == SupportRegion::Kind::all) return json{{"kind", "all_of_Rr"}, {"dim", s.dim}};
  json bounds = json::array();
  for (const auto& side : s.box.sides()) bounds.push_back(json::array({side.lo, side.hi}));
  return json{{"kind", "box"}, {"bounds", bounds}};
}

SupportRegion support_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw InputError("density support: missing kind");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "all_of_Rr") return SupportRegion::everywhere(j.at("dim").get<std::size_t>());
  if (kind == "box") {
    std::vector<Interval> sides;
    for (const auto& b : j.at("bounds")) {
      if (!b.is_array() || b.size() != 2) throw InputError("density support: bounds must be [lo,hi] pairs");
      sides.push_back({b[0].get<double>(), b[1].get<double>()});
    }
    return SupportRegion::boxed(Box(std::move(sides)));
  }
  throw LookupError("density support: unknown kind '" + kind + "'");
}

std::vector<double> params_of(const json& j) {
  if (!j.contains("params") || !j.at("params").is_array())
    throw InputError("density: params must be an array");
  return j.at("params").get<std::vector<double>>();
}

void split_mean_scale(const std::vector<double>& p, std::size_t dim, Point& mean, Point& scale) {
  if (p.size() != 2 * dim) throw InputError("density: params must hold means then scales");
  mean.assign(p.begin(), p.begin() + static_cast<long>(dim));
  scale.assign(p.begin() + static_cast<long>(dim), p.end());
}

}  // namespace

json Density::to_json() const {
  json j;
  j["family"] = family_name();
  j["support"] = support_to_json(support_);
  switch (family_) {
    case Family::gaussian:
    case Family::truncated_gaussian: {
      std::vector<double> p = mean_;
      p.insert(p.end(), scale_.begin(), scale_.end());
      j["params"] = p;
      break;
    }
    case Family::uniform_box:
      j["params"] = json::array();
      break;
    case Family::gaussian_mixture: {
      std::vector<double> p = weights_;
      for (const auto& c : components_) {
        p.insert(p.end(), c.mean_.begin(), c.mean_.end());
        p.insert(p.end(), c.scale_.begin(), c.scale_.end());
      }
      j["params"] = p;
      break;
    }
    case Family::mixture: {
      j["params"] = weights_;
      json comps = json::array();
      for (const auto& c : components_) comps.push_back(c.to_json());
      j["components"] = comps;
      break;
    }
  }
  return j;
}

Density Density::from_json(const json& j) {
  if (!j.is_object()) throw InputError("density: expected a JSON object");
  if (!j.contains("family")) throw InputError("density: missing family");
  if (!j.contains("support")) throw InputError("density: missing support");
  const auto family = j.at("family").get<std::string>();
  const SupportRegion support = support_from_json(j.at("support"));
  const std::size_t dim = support.dim;

  if (family == "gaussian") {
    if (support.kind != SupportRegion::Kind::all) throw InputError("gaussian: support must be all_of_Rr");
    Point m, s;
    split_mean_scale(params_of(j), dim, m, s);
    return gaussian(std::move(m), std::move(s));
  }
  if (family == "uniform_box") {
    if (support.kind != SupportRegion::Kind::box) throw InputError("uniform_box: support must be a box");
    return uniform_box(support.box);
  }
  if (family == "truncated_gaussian") {
    if (support.kind != SupportRegion::Kind::box)
      throw InputError("truncated_gaussian: support must be a box");
    Point m, s;
    split_mean_scale(params_of(j), dim, m, s);
    return truncated_gaussian(std::move(m), std::move(s), support.box);
  }
  if (family == "gaussian_mixture") {
    if (support.kind != SupportRegion::Kind::all)
      throw InputError("gaussian_mixture: support must be all_of_Rr");
    const auto p = params_of(j);
    const std::size_t per = 1 + 2 * dim;
    if (p.empty() || p.size() % per != 0)
      throw InputError("gaussian_mixture: params must be weights then (means, scales) per component");
    const std::size_t k = p.size() / per;
    std::vector<double> w(p.begin(), p.begin() + static_cast<long>(k));
    std::vector<Density> comps;
    for (std::size_t c = 0; c < k; ++c) {
      const auto base = p.begin() + static_cast<long>(k + c * 2 * dim);
      Point m(base, base + static_cast<long>(dim));
      Point s(base + static_cast<long>(dim), base + static_cast<long>(2 * dim));
      comps.push_back(gaussian(std::move(m), std::move(s)));
    }
    return mixture(std::move(w), std::move(comps));
  }
  if (family == "mixture") {
    auto w = params_of(j);
    if (!j.contains("components")) throw InputError("mixture: missing components");
    std::vector<Density> comps;
    for (const auto& c : j.at("components")) comps.push_back(from_json(c));
    Density d = mixture(std::move(w), std::move(comps));
    if (!(d.support_ == support)) throw InputError("mixture: declared support does not match components");
    return d;
  }
  throw LookupError("unknown density family '" + family + "'");
}

// ---- domination ------------------------------------------------------------

double density_ratio_bound(const Density& a, const Density& b) {
  using F = Density::Family;
  if (a.dim() != b.dim()) throw InputError("density ratio: dimension mismatch");

  if (a.family() == F::gaussian_mixture || a.family() == F::mixture) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.components().size(); ++c)
      if (a.weights()[c] > 0.0) s += a.weights()[c] * density_ratio_bound(a.components()[c], b);
    return s;
  }
  if (b.family() == F::gaussian_mixture || b.family() == F::mixture) {
    double best = kInf;
    for (std::size_t c = 0; c < b.components().size(); ++c)
      if (b.weights()[c] > 0.0)
        best = std::min(best, density_ratio_bound(a, b.components()[c]) / b.weights()[c]);
    return best;
  }
  if (!b.support().covers(a.support())) return kInf;

  const std::size_t r = a.dim();
  if (a.family() == F::uniform_box) {
    const Box& box = a.support().box;
    if (b.family() == F::uniform_box) return b.support().box.volume() / box.volume();
    double inf_b = 1.0;
    for (std::size_t k = 0; k < r; ++k)
      inf_b *= gaussian_min_on_interval(b.mean()[k], b.scale()[k], box[k].lo, box[k].hi);
    if (b.family() == F::truncated_gaussian) {
      for (std::size_t k = 0; k < r; ++k) {
        const auto& bs = b.support().box[k];
        inf_b /= std_normal_interval_mass((bs.lo - b.mean()[k]) / b.scale()[k],
                                          (bs.hi - b.mean()[k]) / b.scale()[k]);
      }
    }
    return 1.0 / (box.volume() * inf_b);
  }
  if (b.family() == F::uniform_box) return kInf;  // gaussian shapes against a flat box

  // both gaussian-shaped (possibly truncated)
  double ratio = 1.0;
  for (std::size_t k = 0; k < r; ++k) {
    double lo = -kInf, hi = kInf;
    if (a.support().kind == SupportRegion::Kind::box) {
      lo = a.support().box[k].lo;
      hi = a.support().box[k].hi;
    }
    ratio *= gaussian_ratio_sup_1d(a.mean()[k], a.scale()[k], b.mean()[k], b.scale()[k], lo, hi);
    if (a.family() == F::truncated_gaussian)
      ratio /= std_normal_interval_mass((lo - a.mean()[k]) / a.scale()[k], (hi - a.mean()[k]) / a.scale()[k]);
    if (b.family() == F::truncated_gaussian) {
      const auto& bs = b.support().box[k];
      ratio *= std_normal_interval_mass((bs.lo - b.mean()[k]) / b.scale()[k],
                                        (bs.hi - b.mean()[k]) / b.scale()[k]);
    }
  }
  return ratio;
}

}  // namespace amis
