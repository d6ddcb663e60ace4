#include "amis/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "amis/bounds.hpp"
#include "amis/errors.hpp"
#include "amis/estimator.hpp"
#include "amis/io.hpp"
#include "amis/optimizer.hpp"
#include "amis/parallel.hpp"

namespace amis {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- config --------------------------------------------------------------------

namespace {

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
  throw ConfigError("config field '" + key + "': " + why);
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad_field(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_field(key, "must be finite");
  return d;
}

std::int64_t get_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  bad_field(key, "expected an integer");
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad_field(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad_field(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_number_list(const json& v, const std::string& key) {
  if (v.is_number()) return {get_number(v, key)};
  if (!v.is_array()) bad_field(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_number(e, key));
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "problem") c.problem = get_string(v, k);
    else if (k == "policy") c.policy = get_string(v, k);
    else if (k == "update_period") c.update_period = static_cast<int>(get_integer(v, k));
    else if (k == "defensive_weight") c.defensive_weight = get_number(v, k);
    else if (k == "proposal") {
      if (!v.is_null() && !v.is_object() && !v.is_string()) bad_field(k, "expected a density object or a file path");
      c.proposal = v;
    } else if (k == "n") c.n = get_integer(v, k);
    else if (k == "n_schedule") {
      c.n_schedule.clear();
      if (v.is_number()) c.n_schedule.push_back(get_integer(v, k));
      else if (v.is_array())
        for (const auto& e : v) c.n_schedule.push_back(get_integer(e, k));
      else bad_field(k, "expected a list of integers");
    } else if (k == "R") c.R = static_cast<int>(get_integer(v, k));
    else if (k == "epsilon") c.epsilon = get_number_list(v, k);
    else if (k == "epsilon_relative") c.epsilon_relative = get_bool(v, k);
    else if (k == "delta") c.delta = get_number(v, k);
    else if (k == "refine_delta") c.refine_delta = get_bool(v, k);
    else if (k == "x_eval") {
      c.x_eval.clear();
      if (v.is_number()) c.x_eval.push_back({get_number(v, k)});
      else if (v.is_array()) {
        for (const auto& e : v) {
          if (e.is_number()) c.x_eval.push_back({get_number(e, k)});
          else c.x_eval.push_back(get_number_list(e, k));
        }
      } else bad_field(k, "expected a list of points");
    } else if (k == "seed") {
      if (v.is_number_unsigned()) c.seed = v.get<std::uint64_t>();
      else {
        const auto s = get_integer(v, k);
        if (s < 0) bad_field(k, "must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
      }
    } else if (k == "output_dir") c.output_dir = get_string(v, k);
    else if (k == "grid_points") c.grid_points = static_cast<int>(get_integer(v, k));
    else if (k == "budget") c.budget = static_cast<int>(get_integer(v, k));
    else if (k == "tol") c.tol = get_number(v, k);
    else if (k == "export_history") c.export_history = get_bool(v, k);
    else if (k == "replay") c.replay = get_string(v, k);
    else if (k == "variance_mode") c.variance_mode = get_string(v, k);
    else throw ConfigError("config field '" + k + "': unknown field");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  return json{{"problem", problem},
              {"policy", policy},
              {"update_period", update_period},
              {"defensive_weight", defensive_weight},
              {"proposal", proposal},
              {"n", n},
              {"n_schedule", n_schedule},
              {"R", R},
              {"epsilon", epsilon},
              {"epsilon_relative", epsilon_relative},
              {"delta", delta},
              {"refine_delta", refine_delta},
              {"x_eval", x_eval},
              {"seed", seed},
              {"output_dir", output_dir},
              {"grid_points", grid_points},
              {"budget", budget},
              {"tol", tol},
              {"export_history", export_history},
              {"replay", replay},
              {"variance_mode", variance_mode}};
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
  }
  if (text.find(',') != std::string::npos) {
    try {
      return json::parse("[" + text + "]");
    } catch (const json::parse_error&) {
    }
  }
  return json(text);
}

json resolve_config(const std::string& file_text, const std::vector<std::string>& overrides,
                    const std::string& env_seed) {
  json cfg = json::object();
  if (!file_text.empty()) {
    try {
      cfg = json::parse(file_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");
  }
  if (!env_seed.empty()) {
    std::size_t used = 0;
    std::uint64_t s = 0;
    try {
      s = std::stoull(env_seed, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != env_seed.size() || env_seed.front() == '-') throw ConfigError("AMIS_SEED must be a non-negative integer");
    cfg["seed"] = s;
  }
  for (const auto& o : overrides) {
    std::string body = o;
    if (body.rfind("--", 0) == 0) body = body.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' must look like --key=value");
    cfg[body.substr(0, eq)] = parse_override_value(body.substr(eq + 1));
  }
  return cfg;
}

ProblemPtr load_problem(const std::string& name_or_path) {
  if (name_or_path.empty()) throw ConfigError("config field 'problem': missing required field");
  const auto names = problem_template_names();
  try {
    if (std::find(names.begin(), names.end(), name_or_path) != names.end())
      return std::make_shared<const ProblemInstance>(builtin_problem(name_or_path));
    if (!fs::exists(name_or_path))
      throw ConfigError("config field 'problem': '" + name_or_path + "' is neither a builtin nor an existing file");
    json spec;
    try {
      spec = json::parse(read_text_file(name_or_path));
    } catch (const json::parse_error& e) {
      throw ConfigError("config field 'problem': file is not valid JSON: " + std::string(e.what()));
    }
    return std::make_shared<const ProblemInstance>(problem_from_json(spec));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config field 'problem': ") + e.what());
  }
}

AdaptionPolicy load_policy(const ExperimentConfig& c, const ProblemInstance& p) {
  try {
    AdaptionPolicy pol = make_policy(p, policy_kind_from_name(c.policy), c.update_period, c.defensive_weight);
    if (c.proposal.is_object()) {
      pol.initial_proposal = Density::from_json(c.proposal);
    } else if (c.proposal.is_string()) {
      const auto path = c.proposal.get<std::string>();
      if (!fs::exists(path)) throw ConfigError("config field 'proposal': file '" + path + "' does not exist");
      pol.initial_proposal = Density::from_json(json::parse(read_text_file(path)));
    }
    if (pol.initial_proposal.dim() != p.dim_theta)
      throw ConfigError("config field 'proposal': dimension does not match the problem");
    pol.validate();
    return pol;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field 'proposal': ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("config field 'policy': ") + e.what());
  }
}

// ---- sweep -----------------------------------------------------------------------

DeviationSweep deviation_sweep(const ProblemPtr& p, const AdaptionPolicy& policy, const std::vector<Point>& xs,
                               const std::vector<std::int64_t>& ns, int R, std::uint64_t seed,
                               const PointSet* grid, unsigned threads) {
  if (ns.empty() || R < 1) throw InputError("sweep: need at least one n and one replication");
  for (std::size_t k = 1; k < ns.size(); ++k)
    if (ns[k] <= ns[k - 1]) throw InputError("sweep: n values must be increasing");
  DeviationSweep out;
  out.ns = ns;
  out.xs = xs;
  const std::size_t K = ns.size(), X = xs.size(), rr = static_cast<std::size_t>(R);
  PointSet xset(p->dim_x);
  for (const auto& x : xs) {
    if (!p->domain.contains(x)) throw DomainError("sweep: evaluation point outside the domain");
    xset.push_back(x);
  }
  std::vector<double> fx(X), fg;
  for (std::size_t j = 0; j < X; ++j) fx[j] = p->f(xs[j]);
  if (grid)
    for (std::size_t j = 0; j < grid->size(); ++j) fg.push_back(p->f((*grid)[j]));
  out.H.assign(K, std::vector<std::vector<double>>(X, std::vector<double>(rr)));
  out.sup_H.assign(K, std::vector<double>(grid ? rr : 0));
  out.sup_abs_H.assign(K, std::vector<double>(grid ? rr : 0));

  parallel_for(rr, threads, [&](std::size_t r) {
    Sampler sampler(policy, RngStream(seed + r), false);
    std::vector<NeumaierSum> sx(X), sg(fg.size());
    std::vector<double> bx(X), bg(fg.size());
    Point theta(p->dim_theta);
    double psi = 0.0;
    std::int64_t i = 0;
    for (std::size_t k = 0; k < K; ++k) {
      for (; i < ns[k]; ++i) {
        sampler.step(theta, psi);
        if (X) {
          p->F_batch(xset, theta, bx);
          for (std::size_t j = 0; j < X; ++j) sx[j].add(bx[j] / psi);
        }
        if (grid) {
          p->F_batch(*grid, theta, bg);
          for (std::size_t j = 0; j < bg.size(); ++j) sg[j].add(bg[j] / psi);
        }
      }
      const double n = static_cast<double>(ns[k]);
      for (std::size_t j = 0; j < X; ++j) out.H[k][j][r] = sx[j].value() / n - fx[j];
      if (grid) {
        double hi = -std::numeric_limits<double>::infinity(), ab = 0.0;
        for (std::size_t j = 0; j < fg.size(); ++j) {
          const double h = sg[j].value() / n - fg[j];
          hi = std::max(hi, h);
          ab = std::max(ab, std::fabs(h));
        }
        out.sup_H[k][r] = hi;
        out.sup_abs_H[k][r] = ab;
      }
    }
  });
  return out;
}

// ---- commands ------------------------------------------------------------------------

namespace {

struct Context {
  ExperimentConfig cfg;
  ProblemPtr problem;
  AdaptionPolicy policy;
  unsigned threads = 1;
};

void check_points(const Context& ctx) {
  for (const auto& x : ctx.cfg.x_eval) {
    if (x.size() != ctx.problem->dim_x) bad_field("x_eval", "point dimension does not match the problem");
    if (!ctx.problem->domain.contains(x)) bad_field("x_eval", "point lies outside the decision domain");
  }
}

std::vector<std::int64_t> schedule_of(const ExperimentConfig& c, const char* cmd) {
  std::vector<std::int64_t> s = c.n_schedule;
  if (s.empty() && c.n > 0) s.push_back(c.n);
  if (s.empty()) throw ConfigError(std::string("config field 'n': required by ") + cmd);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 1) bad_field("n_schedule", "entries must be positive");
    if (k > 0 && s[k] <= s[k - 1]) bad_field("n_schedule", "must be increasing");
  }
  return s;
}

Context prepare(const std::string& command, const json& raw, unsigned threads) {
  Context ctx;
  ctx.cfg = ExperimentConfig::parse(raw);
  ctx.threads = std::max(1u, threads);
  const auto& c = ctx.cfg;
  if (c.problem.empty()) throw ConfigError("config field 'problem': missing required field");
  ctx.problem = load_problem(c.problem);
  ctx.policy = load_policy(c, *ctx.problem);
  if (c.grid_points < 11) bad_field("grid_points", "must be at least 11");
  if (c.budget < 100) bad_field("budget", "must be at least 100");
  if (!(c.tol > 0.0)) bad_field("tol", "must be positive");
  if (c.output_dir.empty()) bad_field("output_dir", "must not be empty");
  if (c.variance_mode != "B3" && c.variance_mode != "B3_prime") bad_field("variance_mode", "expected B3 or B3_prime");
  check_points(ctx);

  if (command == "estimate") {
    if (!c.replay.empty()) {
      if (!fs::exists(c.replay)) bad_field("replay", "file '" + c.replay + "' does not exist");
    } else if (c.n < 1) {
      throw ConfigError("config field 'n': required by estimate and must be positive");
    }
  } else if (command == "tailbound") {
    schedule_of(c, "tailbound");
    if (c.epsilon.empty()) bad_field("epsilon", "required by tailbound");
    for (double e : c.epsilon)
      if (!(e > 0.0)) bad_field("epsilon", "values must be positive");
    if (c.R < 1) bad_field("R", "required by tailbound and must be positive");
    if (c.delta < 0.0) bad_field("delta", "must be non-negative");
  } else if (command == "clt") {
    if (c.n < 64) throw ConfigError("config field 'n': required by clt and must be at least 64");
    if (c.R < 100) bad_field("R", "must be at least 100");
    if (!c.n_schedule.empty()) schedule_of(c, "clt");
  } else if (command == "conditions") {
    schedule_of(c, "conditions");
  } else if (command != "verify-problem") {
    throw ConfigError("unknown command '" + command + "'");
  }
  return ctx;
}

std::string out_path(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.cfg.output_dir);
  return (fs::path(ctx.cfg.output_dir) / name).string();
}

void emit(CommandResult& res, const Context& ctx, const std::string& name, const std::string& text) {
  const auto path = out_path(ctx, name);
  write_text_file(path, text);
  res.files.push_back(path);
}

std::string x_header(std::size_t m) {
  std::string h;
  for (std::size_t d = 0; d < m; ++d) h += (d ? ",x_" : "x_") + std::to_string(d + 1);
  return h;
}

json base_summary(const Context& ctx, const std::string& command) {
  return json{{"command", command},
              {"problem", ctx.problem->name},
              {"policy", ctx.policy.to_json()},
              {"seed", ctx.cfg.seed},
              {"config", ctx.cfg.to_json()}};
}

CommandResult cmd_estimate(const Context& ctx) {
  CommandResult res;
  const auto& c = ctx.cfg;
  const auto& P = *ctx.problem;
  History hist(P.dim_theta);
  std::vector<std::string> adapt_errors;
  if (!c.replay.empty()) {
    hist = history_from_csv(read_text_file(c.replay));
    if (hist.dim() != P.dim_theta) throw InputError("replay history dimension does not match the problem");
  } else {
    Sampler s(ctx.policy, RngStream(c.seed));
    s.run(static_cast<std::size_t>(c.n));
    hist = s.history();
    adapt_errors = s.adaptation_errors();
  }
  const Estimator est(ctx.problem, hist);
  const PointSet grid = tensor_grid(P.domain, nodes_per_side(static_cast<std::size_t>(c.grid_points), P.dim_x));
  const GridProfile prof = est.grid_profile(grid);
  const OptimizationResult opt = minimize(est, c.budget, c.tol);

  std::ostringstream csv;
  csv << x_header(P.dim_x) << ",f_n,H_n\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (double v : grid[j]) csv << fmt17(v) << ',';
    csv << fmt17(prof.f_n[j]) << ',' << fmt17(prof.H_n[j]) << '\n';
  }
  emit(res, ctx, "profile.csv", csv.str());

  json s = base_summary(ctx, "estimate");
  s["n"] = est.n();
  s["replayed"] = !c.replay.empty();
  s["theta_n"] = opt.theta_n;
  s["true_optimum"] = P.true_optimum;
  s["scaled_gap"] = std::sqrt(static_cast<double>(est.n())) * (opt.theta_n - P.true_optimum);
  s["optimization"] = opt.to_json();
  s["sup_abs_H_grid"] = prof.sup_abs_H;
  s["adaptation_errors"] = adapt_errors;
  emit(res, ctx, "summary.json", dump_json(s));
  if (c.export_history) emit(res, ctx, "history.csv", history_to_csv(hist));
  res.message = "estimate: theta_n = " + fmt17(opt.theta_n);
  return res;
}

double freq_ge(const std::vector<double>& v, double eps) {
  std::size_t c = 0;
  for (double h : v) c += h >= eps ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double freq_abs_ge(const std::vector<double>& v, double eps) {
  std::size_t c = 0;
  for (double h : v) c += std::fabs(h) >= eps ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double stderr_of(double p, int R) { return std::sqrt(p * (1.0 - p) / R); }

CommandResult cmd_tailbound(const Context& ctx) {
  CommandResult res;
  const auto& c = ctx.cfg;
  const auto& P = *ctx.problem;
  const auto ns = schedule_of(c, "tailbound");
  std::vector<Point> xs = c.x_eval;
  if (xs.empty()) {
    xs.push_back(P.anchor);
    for (const auto& s : P.true_solution_set)
      if (std::find(xs.begin(), xs.end(), s) == xs.end()) xs.push_back(s);
  }
  const double dom = domination_factor(ctx.policy, P.reference_proposal);
  const bool have_env = std::isfinite(dom);

  std::optional<PointSet> grid;
  if (c.delta > 0.0) grid = tensor_grid(P.domain, nodes_per_side(static_cast<std::size_t>(c.grid_points), P.dim_x));
  const DeviationSweep sw = deviation_sweep(ctx.problem, ctx.policy, xs, ns, c.R, c.seed, grid ? &*grid : nullptr, ctx.threads);

  std::ostringstream csv;
  csv << "n,epsilon,pointwise_bound,uniform_bound,empirical_probability,mc_stderr," << x_header(P.dim_x)
      << ",pointwise_one_sided,empirical_one_sided,one_sided_stderr,uniform_one_sided,empirical_sup,"
         "empirical_sup_abs,delta_used,covering_size,status,uniform_status\n";
  std::size_t rows = 0, skipped = 0, uniform_skipped = 0, violations = 0;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      for (double e_in : c.epsilon) {
        ++rows;
        std::string status = "ok", ustatus = c.delta > 0.0 ? "ok" : "not requested";
        double eps = e_in;
        double b = std::numeric_limits<double>::quiet_NaN();
        if (have_env) b = envelope(P, xs[xi], dom).L;
        if (c.epsilon_relative) eps = e_in * b;
        double pw2 = NAN, pw1 = NAN, u2 = NAN, u1 = NAN, delta_used = NAN;
        std::size_t K = 0;
        if (!have_env) {
          status = "skipped: policy has no finite envelope";
        } else {
          try {
            const auto pb = two_sided_pointwise_bound(P, xs[xi], eps, ns[k], dom);
            pw2 = pb.two_sided;
            pw1 = pb.one_sided;
          } catch (const PreconditionError& err) {
            status = std::string("skipped: ") + err.what();
          }
        }
        const auto& H = sw.H[k][xi];
        const double e2 = freq_abs_ge(H, eps), e1 = freq_ge(H, eps);
        const double se2 = stderr_of(e2, c.R), se1 = stderr_of(e1, c.R);
        double es = NAN, esa = NAN;
        if (grid) {
          es = freq_ge(sw.sup_H[k], eps);
          esa = freq_ge(sw.sup_abs_H[k], eps);
          if (!have_env) {
            ustatus = "skipped: policy has no finite envelope";
          } else {
            try {
              const CalmnessSpec calm = calmness_for(P, dom);
              delta_used = c.delta;
              if (c.refine_delta) delta_used = std::min(c.delta, max_admissible_delta(P, calm, eps));
              const Covering cov = covering(P.domain, delta_used);
              K = cov.size();
              u2 = uniform_bound(P, cov, calm, eps, ns[k], dom, true).value;
              u1 = uniform_bound(P, cov, calm, eps, ns[k], dom, false).value;
            } catch (const PreconditionError& err) {
              ustatus = std::string("skipped: ") + err.what();
            }
          }
        }
        if (status != "ok") ++skipped;
        if (grid && ustatus != "ok") ++uniform_skipped;
        bool bad = false;
        if (status == "ok") bad = bad || e2 > pw2 + 3.0 * se2 || e1 > pw1 + 3.0 * se1;
        if (grid && ustatus == "ok")
          bad = bad || esa > u2 + 3.0 * stderr_of(esa, c.R) || es > u1 + 3.0 * stderr_of(es, c.R);
        if (bad) {
          ++violations;
          status += "; violation";
        }
        csv << ns[k] << ',' << fmt17(eps) << ',' << fmt17(pw2) << ',' << fmt17(u2) << ',' << fmt17(e2) << ','
            << fmt17(se2);
        for (double v : xs[xi]) csv << ',' << fmt17(v);
        csv << ',' << fmt17(pw1) << ',' << fmt17(e1) << ',' << fmt17(se1) << ',' << fmt17(u1) << ',' << fmt17(es)
            << ',' << fmt17(esa) << ',' << fmt17(delta_used) << ',' << K << ',' << csv_quote(status) << ','
            << csv_quote(ustatus) << '\n';
      }
    }
  }
  emit(res, ctx, "tailbound.csv", csv.str());
  json s = base_summary(ctx, "tailbound");
  s["rows"] = rows;
  s["skipped_rows"] = skipped;
  s["uniform_skipped_rows"] = uniform_skipped;
  s["violations"] = violations;
  s["domination_factor"] = have_env ? json(dom) : json(nullptr);
  s["R"] = c.R;
  emit(res, ctx, "tailbound_summary.json", dump_json(s));
  res.message = "tailbound: " + std::to_string(rows) + " rows, " + std::to_string(violations) + " violations";
  if (violations > 0) res.exit_code = 4;
  return res;
}

json gap_stats(const std::vector<double>& g) {
  NeumaierSum s;
  for (double v : g) s.add(v);
  const double mean = s.value() / static_cast<double>(g.size());
  NeumaierSum q;
  for (double v : g) q.add((v - mean) * (v - mean));
  const double var = q.value() / static_cast<double>(g.size() - 1);
  return json{{"mean", mean},
              {"variance", var},
              {"stddev", std::sqrt(var)},
              {"min", quantile(g, 0.0)},
              {"q05", quantile(g, 0.05)},
              {"q25", quantile(g, 0.25)},
              {"median", quantile(g, 0.5)},
              {"q75", quantile(g, 0.75)},
              {"q95", quantile(g, 0.95)},
              {"max", quantile(g, 1.0)}};
}

CommandResult cmd_clt(const Context& ctx) {
  CommandResult res;
  const auto& c = ctx.cfg;
  const auto& P = *ctx.problem;
  ReplicateOptions ro{c.budget, c.tol, ctx.threads};
  const ReplicationSet set = replicate(ctx.problem, ctx.policy, c.n, c.R, c.seed, ro);

  std::ostringstream csv;
  csv << "seed,n,theta_n,scaled_gap";
  for (std::size_t d = 0; d < P.dim_x; ++d) csv << ",minimizer_" << d + 1;
  csv << ",converged\n";
  for (const auto& r : set.results) {
    csv << r.seed << ',' << r.n << ',' << fmt17(r.theta_n) << ',' << fmt17(r.scaled_gap);
    for (double v : r.minimizer) csv << ',' << fmt17(v);
    csv << ',' << (r.converged ? 1 : 0) << '\n';
  }
  emit(res, ctx, "replications.csv", csv.str());

  const auto gaps = set.gaps();
  json rep = base_summary(ctx, "clt");
  rep["n"] = c.n;
  rep["R"] = c.R;
  rep["gaps"] = gap_stats(gaps);
  std::vector<std::string> warnings = set.warnings;
  const bool singleton = P.true_solution_set.size() == 1;
  rep["singleton_solution"] = singleton;
  bool passed = true;
  if (singleton) {
    const bool fixed_ref = ctx.policy.kind == PolicyKind::fixed && ctx.policy.initial_proposal == P.reference_proposal;
    std::optional<double> ct;
    if (!fixed_ref) {
      std::int64_t n_long = 8 * std::max(c.n, c.n_schedule.empty() ? c.n : c.n_schedule.back());
      ct = estimate_c_tilde(ctx.problem, ctx.policy, n_long, c.seed ^ 0x9E3779B97F4A7C15ull);
      warnings.push_back("second-moment limit estimated from one chain of length " + std::to_string(n_long));
    }
    const VarianceModel vm =
        variance_model(ctx.problem, c.variance_mode == "B3" ? VarianceMode::B3 : VarianceMode::B3_prime, ct);
    const double s2 = vm.sigma2(P.true_solution_set.front());
    const double mean = rep["gaps"]["mean"].get<double>();
    const double var = rep["gaps"]["variance"].get<double>();
    const double sd = std::sqrt(var);
    const bool mean_ok = std::fabs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(c.R));
    const bool var_ok = s2 > 0.0 && std::fabs(var / s2 - 1.0) <= 0.15;
    rep["variance_model"] = json{{"mode", c.variance_mode},
                                 {"c_tilde", vm.c_tilde},
                                 {"c_tilde_estimated", vm.c_tilde_estimated},
                                 {"sigma2", s2}};
    rep["mean_check"] = json{{"passed", mean_ok}, {"limit", 4.0 * sd / std::sqrt(static_cast<double>(c.R))}};
    rep["variance_check"] = json{{"passed", var_ok}, {"ratio", s2 > 0.0 ? var / s2 : NAN}};
    if (s2 > 0.0) {
      const KsReport ks = normality_test(gaps, s2);
      rep["ks"] = ks.to_json();
      passed = ks.passed && mean_ok && var_ok;
    } else {
      warnings.push_back("limit variance is zero; normality test not applicable");
      passed = mean_ok;
    }
  } else {
    rep["note"] = "multiple minimizers: empirical distribution only";
  }

  std::vector<std::int64_t> sched = c.n_schedule;
  if (sched.empty()) {
    std::set<std::int64_t> s{std::max<std::int64_t>(64, c.n / 16), std::max<std::int64_t>(64, c.n / 4), c.n};
    sched.assign(s.begin(), s.end());
  }
  const DecayReport decay = op_small_check(ctx.problem, ctx.policy, sched, std::min(c.R, 500), c.seed, ro);
  rep["decay"] = decay.to_json();
  if (singleton) passed = passed && decay.passed;
  rep["passed"] = singleton ? json(passed) : json(nullptr);
  rep["warnings"] = warnings;
  emit(res, ctx, "normality.json", dump_json(rep));
  res.message = singleton ? (passed ? "clt: checks passed" : "clt: checks failed") : "clt: distribution reported";
  if (singleton && !passed) res.exit_code = 4;
  return res;
}

CommandResult cmd_conditions(const Context& ctx) {
  CommandResult res;
  const auto sched = schedule_of(ctx.cfg, "conditions");
  const CltDiagnostics d = clt_conditions(ctx.problem, ctx.policy, sched, ctx.cfg.seed);
  json out = base_summary(ctx, "conditions");
  out["diagnostics"] = d.to_json();
  emit(res, ctx, "conditions.json", dump_json(out));
  res.message = "conditions: diagnostics written";
  return res;
}

CommandResult cmd_verify(const Context& ctx) {
  CommandResult res;
  const VerificationReport r = verify_ground_truth(*ctx.problem, static_cast<std::size_t>(ctx.cfg.grid_points));
  json out = base_summary(ctx, "verify-problem");
  out["report"] = r.to_json();
  emit(res, ctx, "verification.json", dump_json(out));
  res.message = r.passed ? "verify-problem: passed" : "verify-problem: failed";
  if (!r.passed) res.exit_code = 4;
  return res;
}

}  // namespace

std::vector<std::string> command_names() { return {"estimate", "tailbound", "clt", "conditions", "verify-problem"}; }

CommandResult run_command(const std::string& command, const json& config, unsigned threads) {
  Context ctx;
  try {
    ctx = prepare(command, config, threads);
  } catch (const std::exception& e) {
    return {2, e.what(), {}};
  }
  try {
    if (command == "estimate") return cmd_estimate(ctx);
    if (command == "tailbound") return cmd_tailbound(ctx);
    if (command == "clt") return cmd_clt(ctx);
    if (command == "conditions") return cmd_conditions(ctx);
    return cmd_verify(ctx);
  } catch (const std::exception& e) {
    return {3, e.what(), {}};
  }
}

}  // namespace amis
