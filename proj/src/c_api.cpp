#include "amis.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "amis/bounds.hpp"
#include "amis/errors.hpp"
#include "amis/estimator.hpp"
#include "amis/experiment.hpp"
#include "amis/io.hpp"
#include "amis/optimizer.hpp"

using nlohmann::json;

struct amis_density {
  amis::Density d;
};

struct amis_problem {
  amis::ProblemPtr p;
};

struct amis_sampler {
  amis::ProblemPtr p;
  std::unique_ptr<amis::Sampler> s;
};

namespace {

thread_local std::string last_error;

amis_status code_of(amis::ErrorKind k) {
  switch (k) {
    case amis::ErrorKind::input: return AMIS_ERR_INPUT;
    case amis::ErrorKind::domain: return AMIS_ERR_DOMAIN;
    case amis::ErrorKind::lookup: return AMIS_ERR_LOOKUP;
    case amis::ErrorKind::capability: return AMIS_ERR_CAPABILITY;
    case amis::ErrorKind::precondition: return AMIS_ERR_PRECONDITION;
    case amis::ErrorKind::adaptation: return AMIS_ERR_ADAPTATION;
    case amis::ErrorKind::config: return AMIS_ERR_CONFIG;
    default: return AMIS_ERR_RUNTIME;
  }
}

template <class Fn>
amis_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return AMIS_OK;
  } catch (const amis::Error& e) {
    last_error = e.what();
    return code_of(e.kind());
  } catch (const json::exception& e) {
    last_error = e.what();
    return AMIS_ERR_INPUT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return AMIS_ERR_RUNTIME;
  }
}

amis_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return AMIS_ERR_NULL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

amis::TailBoundSpec spec(double b, double k, double eps, int64_t n) {
  amis::TailBoundSpec s{b, k, eps, n};
  s.validate();
  return s;
}

std::span<const double> view(const double* v, size_t n) { return {v, n}; }

}  // namespace

#define AMIS_REQUIRE(ptr) \
  if (!(ptr)) return null_arg(#ptr)

extern "C" {

const char* amis_last_error(void) { return last_error.c_str(); }

const char* amis_status_name(amis_status s) {
  switch (s) {
    case AMIS_OK: return "ok";
    case AMIS_ERR_INPUT: return "input error";
    case AMIS_ERR_DOMAIN: return "domain error";
    case AMIS_ERR_LOOKUP: return "lookup error";
    case AMIS_ERR_CAPABILITY: return "capability error";
    case AMIS_ERR_PRECONDITION: return "precondition error";
    case AMIS_ERR_ADAPTATION: return "adaptation error";
    case AMIS_ERR_CONFIG: return "config error";
    case AMIS_ERR_RUNTIME: return "runtime error";
    case AMIS_ERR_NULL: return "null argument";
  }
  return "unknown";
}

const char* amis_version(void) { return "0.1.0"; }

void amis_string_free(char* s) { std::free(s); }

amis_status amis_relative_entropy(double p, double q, double* out) {
  AMIS_REQUIRE(out);
  return guarded([&] { *out = amis::relative_entropy(p, q); });
}

amis_status amis_bennett_mgf_bound(double b, double k, double epsilon, int64_t n, double lambda, double* out) {
  AMIS_REQUIRE(out);
  return guarded([&] { *out = amis::bennett_mgf_bound(spec(b, k, epsilon, n), lambda); });
}

amis_status amis_tail_bound(double b, double k, double epsilon, int64_t n, double* out) {
  AMIS_REQUIRE(out);
  return guarded([&] { *out = amis::tail_bound(spec(b, k, epsilon, n)); });
}

amis_status amis_optimal_lambda(double b, double k, double epsilon, int64_t n, double* out) {
  AMIS_REQUIRE(out);
  return guarded([&] { *out = amis::optimal_lambda(spec(b, k, epsilon, n)); });
}

amis_status amis_covering_size(const double* lo, const double* hi, size_t dim, double delta, size_t* out) {
  AMIS_REQUIRE(lo);
  AMIS_REQUIRE(hi);
  AMIS_REQUIRE(out);
  return guarded([&] {
    std::vector<amis::Interval> iv;
    for (size_t d = 0; d < dim; ++d) iv.push_back({lo[d], hi[d]});
    *out = amis::covering(amis::Box(iv), delta).size();
  });
}

amis_status amis_density_from_json(const char* text, amis_density** out) {
  AMIS_REQUIRE(text);
  AMIS_REQUIRE(out);
  return guarded([&] { *out = new amis_density{amis::Density::from_json(json::parse(text))}; });
}

amis_status amis_density_to_json(const amis_density* d, char** out) {
  AMIS_REQUIRE(d);
  AMIS_REQUIRE(out);
  return guarded([&] { *out = dup_string(amis::dump_json(d->d.to_json(), 0)); });
}

amis_status amis_density_evaluate(const amis_density* d, const double* theta, size_t dim, double* out) {
  AMIS_REQUIRE(d);
  AMIS_REQUIRE(theta);
  AMIS_REQUIRE(out);
  return guarded([&] { *out = d->d.evaluate(view(theta, dim)); });
}

amis_status amis_density_ratio_bound(const amis_density* a, const amis_density* b, double* out) {
  AMIS_REQUIRE(a);
  AMIS_REQUIRE(b);
  AMIS_REQUIRE(out);
  return guarded([&] { *out = amis::density_ratio_bound(a->d, b->d); });
}

void amis_density_free(amis_density* d) { delete d; }

amis_status amis_problem_builtin(const char* name, amis_problem** out) {
  AMIS_REQUIRE(name);
  AMIS_REQUIRE(out);
  return guarded([&] {
    *out = new amis_problem{std::make_shared<const amis::ProblemInstance>(amis::builtin_problem(name))};
  });
}

amis_status amis_problem_from_json(const char* text, amis_problem** out) {
  AMIS_REQUIRE(text);
  AMIS_REQUIRE(out);
  return guarded([&] {
    *out = new amis_problem{
        std::make_shared<const amis::ProblemInstance>(amis::problem_from_json(json::parse(text)))};
  });
}

amis_status amis_problem_dims(const amis_problem* p, size_t* dim_x, size_t* dim_theta) {
  AMIS_REQUIRE(p);
  if (dim_x) *dim_x = p->p->dim_x;
  if (dim_theta) *dim_theta = p->p->dim_theta;
  last_error.clear();
  return AMIS_OK;
}

amis_status amis_problem_objective(const amis_problem* p, const double* x, size_t dim, double* out) {
  AMIS_REQUIRE(p);
  AMIS_REQUIRE(x);
  AMIS_REQUIRE(out);
  return guarded([&] {
    if (dim != p->p->dim_x) throw amis::InputError("objective: dimension mismatch");
    *out = p->p->f(view(x, dim));
  });
}

amis_status amis_problem_integrand(const amis_problem* p, const double* x, size_t dim_x, const double* theta,
                                   size_t dim_theta, double* out) {
  AMIS_REQUIRE(p);
  AMIS_REQUIRE(x);
  AMIS_REQUIRE(theta);
  AMIS_REQUIRE(out);
  return guarded([&] {
    if (dim_x != p->p->dim_x || dim_theta != p->p->dim_theta) throw amis::InputError("integrand: dimension mismatch");
    *out = p->p->F(view(x, dim_x), view(theta, dim_theta));
  });
}

amis_status amis_problem_true_optimum(const amis_problem* p, double* out) {
  AMIS_REQUIRE(p);
  AMIS_REQUIRE(out);
  *out = p->p->true_optimum;
  last_error.clear();
  return AMIS_OK;
}

amis_status amis_problem_pointwise_bound(const amis_problem* p, const double* x, size_t dim, double epsilon,
                                         int64_t n, double* one_sided, double* two_sided) {
  AMIS_REQUIRE(p);
  AMIS_REQUIRE(x);
  return guarded([&] {
    if (dim != p->p->dim_x) throw amis::InputError("pointwise bound: dimension mismatch");
    const auto b = amis::two_sided_pointwise_bound(*p->p, view(x, dim), epsilon, n);
    if (one_sided) *one_sided = b.one_sided;
    if (two_sided) *two_sided = b.two_sided;
  });
}

amis_status amis_problem_verify(const amis_problem* p, size_t grid_points, int* passed, char** report_json) {
  AMIS_REQUIRE(p);
  return guarded([&] {
    const auto r = amis::verify_ground_truth(*p->p, grid_points);
    if (passed) *passed = r.passed ? 1 : 0;
    if (report_json) *report_json = dup_string(amis::dump_json(r.to_json()));
  });
}

void amis_problem_free(amis_problem* p) { delete p; }

amis_status amis_sampler_create(const amis_problem* p, const char* policy, int update_period,
                                double defensive_weight, uint64_t seed, amis_sampler** out) {
  AMIS_REQUIRE(p);
  AMIS_REQUIRE(policy);
  AMIS_REQUIRE(out);
  return guarded([&] {
    auto pol = amis::make_policy(*p->p, amis::policy_kind_from_name(policy), update_period, defensive_weight);
    pol.validate();
    *out = new amis_sampler{p->p, std::make_unique<amis::Sampler>(pol, amis::RngStream(seed))};
  });
}

amis_status amis_sampler_run(amis_sampler* s, size_t n) {
  AMIS_REQUIRE(s);
  return guarded([&] { s->s->run(n); });
}

amis_status amis_sampler_size(const amis_sampler* s, size_t* out) {
  AMIS_REQUIRE(s);
  AMIS_REQUIRE(out);
  *out = s->s->history().size();
  last_error.clear();
  return AMIS_OK;
}

amis_status amis_sampler_draw(const amis_sampler* s, size_t index, double* theta, size_t dim, double* psi) {
  AMIS_REQUIRE(s);
  return guarded([&] {
    const auto& h = s->s->history();
    if (index >= h.size()) throw amis::InputError("draw: index out of range");
    if (theta) {
      if (dim != h.dim()) throw amis::InputError("draw: dimension mismatch");
      const auto t = h.theta(index);
      std::copy(t.begin(), t.end(), theta);
    }
    if (psi) *psi = h.psi(index);
  });
}

amis_status amis_sampler_history_csv(const amis_sampler* s, char** out) {
  AMIS_REQUIRE(s);
  AMIS_REQUIRE(out);
  return guarded([&] { *out = dup_string(amis::history_to_csv(s->s->history())); });
}

void amis_sampler_free(amis_sampler* s) { delete s; }

amis_status amis_estimate(const amis_sampler* s, const double* x, size_t dim, double* f_n) {
  AMIS_REQUIRE(s);
  AMIS_REQUIRE(x);
  AMIS_REQUIRE(f_n);
  return guarded([&] {
    if (dim != s->p->dim_x) throw amis::InputError("estimate: dimension mismatch");
    const amis::Estimator est(s->p, s->s->history());
    *f_n = est.evaluate_fn(view(x, dim));
  });
}

amis_status amis_minimize(const amis_sampler* s, int budget, double tol, double* theta_n, char** result_json) {
  AMIS_REQUIRE(s);
  return guarded([&] {
    const amis::Estimator est(s->p, s->s->history());
    const auto r = amis::minimize(est, budget, tol);
    if (theta_n) *theta_n = r.theta_n;
    if (result_json) *result_json = dup_string(amis::dump_json(r.to_json()));
  });
}

amis_status amis_config_resolve(const char* file_text, const char* const* overrides, size_t count,
                                const char* env_seed, char** out_json) {
  AMIS_REQUIRE(out_json);
  if (count > 0 && !overrides) return null_arg("overrides");
  return guarded([&] {
    std::vector<std::string> ov;
    for (size_t i = 0; i < count; ++i) {
      if (!overrides[i]) throw amis::InputError("override list contains a null entry");
      ov.emplace_back(overrides[i]);
    }
    const json cfg = amis::resolve_config(file_text ? file_text : "", ov, env_seed ? env_seed : "");
    *out_json = dup_string(cfg.dump());
  });
}

amis_status amis_run(const char* command, const char* config_json, unsigned threads, int* exit_code,
                     char** message) {
  AMIS_REQUIRE(command);
  AMIS_REQUIRE(config_json);
  AMIS_REQUIRE(exit_code);
  return guarded([&] {
    json cfg;
    try {
      cfg = json::parse(config_json);
    } catch (const json::parse_error& e) {
      throw amis::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const auto r = amis::run_command(command, cfg, threads);
    *exit_code = r.exit_code;
    if (message) {
      std::string m = r.message;
      for (const auto& f : r.files) m += "\nwrote " + f;
      *message = dup_string(m);
    }
  });
}

}  // extern "C"
