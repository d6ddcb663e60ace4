// Acceptance run: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "amis/asymptotics.hpp"
#include "amis/bounds.hpp"
#include "amis/estimator.hpp"
#include "amis/experiment.hpp"
#include "amis/io.hpp"
#include "amis/optimizer.hpp"

using namespace amis;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Line> lines;
json report = json::object();

template <class Fn>
void criterion(int id, const std::string& name, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f s", secs);
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << " " << name << ": " << detail << " (" << buf << ")"
            << std::endl;
  lines.push_back({id, name, pass, detail, secs});
}

ProblemPtr shared(const std::string& name) { return std::make_shared<const ProblemInstance>(builtin_problem(name)); }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double freq_ge(const std::vector<double>& v, double eps) {
  std::size_t c = 0;
  for (double h : v) c += h >= eps;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double freq_abs_ge(const std::vector<double>& v, double eps) {
  std::size_t c = 0;
  for (double h : v) c += std::fabs(h) >= eps;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

double mc_stderr(double p, std::size_t R) { return std::sqrt(p * (1.0 - p) / static_cast<double>(R)); }

std::vector<Point> anchor_and_minimizers(const ProblemInstance& p) {
  std::vector<Point> xs{p.anchor};
  for (const auto& s : p.true_solution_set)
    if (std::find(xs.begin(), xs.end(), s) == xs.end()) xs.push_back(s);
  return xs;
}

// ---- 1 -----------------------------------------------------------------------

bool entropy_algebra(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240101);
  std::uniform_real_distribution<double> U(0.05, 5.0), V(0.01, 0.99);
  std::uniform_int_distribution<int> N(1, 100);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    TailBoundSpec s{U(gen), U(gen), 0.0, N(gen)};
    s.epsilon = V(gen) * s.b;
    const double lam = optimal_lambda(s);
    const double lhs = std::exp(-lam * static_cast<double>(s.n) * s.epsilon) * bennett_mgf_bound(s, lam);
    const double rhs = tail_bound(s);
    worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
  }
  std::size_t nonpositive = 0;
  std::uniform_real_distribution<double> P(0.0, 1.0);
  std::size_t pairs = 0;
  while (pairs < 10000) {
    const double p = P(gen), q = P(gen);
    if (p == q || q == 0.0) continue;
    ++pairs;
    if (!(relative_entropy(p, q) > 0.0)) ++nonpositive;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail = "max relative gap " + fmt(worst, 3) + " over 1000 specs (tol 1e-12); " + std::to_string(nonpositive) +
           " non-positive entropies in 10^4 pairs; " + fmt(secs, 3) + " s (limit 1 s)";
  report["1"] = {{"max_relative_gap", worst}, {"nonpositive", nonpositive}, {"seconds", secs}};
  return worst <= 1e-12 && nonpositive == 0 && secs < 1.0;
}

// ---- 2 and 3 ----------------------------------------------------------------------

struct SoundnessTally {
  std::size_t point_rows = 0, point_violations = 0;
  std::size_t uniform_rows = 0, uniform_violations = 0, uniform_refined = 0;
  std::size_t slope_series = 0, slope_vacuous = 0, slope_failures = 0;
  double worst_point_excess = -1.0, worst_uniform_excess = -1.0;
  json rows = json::array();
  json slopes = json::array();
};

void soundness_run(const std::string& problem, PolicyKind kind, int R, std::uint64_t seed, unsigned threads,
                   SoundnessTally& t) {
  const auto p = shared(problem);
  const auto pol = make_policy(*p, kind);
  const double dom = domination_factor(pol, p->reference_proposal);
  const auto xs = anchor_and_minimizers(*p);
  const std::vector<std::int64_t> ns{100, 1000, 10000};
  const PointSet grid = tensor_grid(p->domain, 101);
  const auto sw = deviation_sweep(p, pol, xs, ns, R, seed, &grid, threads);
  const CalmnessSpec calm = calmness_for(*p, dom);

  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    const double b = envelope(*p, xs[xi], dom).L;
    for (double frac : {0.1, 0.2, 0.4}) {
      const double eps = frac * b;
      std::vector<double> freqs, rates;
      for (std::size_t k = 0; k < ns.size(); ++k) {
        const auto& H = sw.H[k][xi];
        const auto pb = two_sided_pointwise_bound(*p, xs[xi], eps, ns[k], dom);
        const double e1 = freq_ge(H, eps), e2 = freq_abs_ge(H, eps);
        const double ex1 = e1 - (pb.one_sided + 3 * mc_stderr(e1, H.size()));
        const double ex2 = e2 - (pb.two_sided + 3 * mc_stderr(e2, H.size()));
        t.point_rows += 2;
        t.point_violations += (ex1 > 0) + (ex2 > 0);
        t.worst_point_excess = std::max({t.worst_point_excess, ex1, ex2});

        double delta = 0.05;
        const double dmax = max_admissible_delta(*p, calm, eps);
        if (dmax < delta) {
          delta = dmax;
          ++t.uniform_refined;
        }
        const Covering cov = covering(p->domain, delta);
        const auto u2 = uniform_bound(*p, cov, calm, eps, ns[k], dom, true);
        const auto u1 = uniform_bound(*p, cov, calm, eps, ns[k], dom, false);
        const double s1 = freq_ge(sw.sup_H[k], eps), s2 = freq_ge(sw.sup_abs_H[k], eps);
        const double ux1 = s1 - (u1.value + 3 * mc_stderr(s1, R));
        const double ux2 = s2 - (u2.value + 3 * mc_stderr(s2, R));
        t.uniform_rows += 2;
        t.uniform_violations += (ux1 > 0) + (ux2 > 0);
        t.worst_uniform_excess = std::max({t.worst_uniform_excess, ux1, ux2});
        freqs.push_back(s2);
        rates.push_back(u2.dominant_rate);
        t.rows.push_back({{"problem", problem}, {"policy", policy_kind_name(kind)}, {"x", xs[xi]}, {"n", ns[k]},
                          {"epsilon", eps}, {"pointwise_one_sided", pb.one_sided}, {"empirical_one_sided", e1},
                          {"pointwise_two_sided", pb.two_sided}, {"empirical_two_sided", e2},
                          {"uniform_one_sided", u1.value}, {"empirical_sup", s1},
                          {"uniform_two_sided", u2.value}, {"empirical_sup_abs", s2}, {"delta", delta},
                          {"covering_size", cov.size()}});
      }
      // decay of the uniform exceedance frequency in n
      ++t.slope_series;
      std::vector<std::size_t> pos;
      for (std::size_t k = 0; k < freqs.size(); ++k)
        if (freqs[k] > 0) pos.push_back(k);
      std::string verdict;
      double slope = NAN;
      const double bound_slope = -*std::min_element(rates.begin(), rates.end());
      if (pos.empty()) {
        ++t.slope_vacuous;
        verdict = "vacuous";
      } else if (pos.size() == 1) {
        const bool last = pos.front() + 1 == freqs.size();
        verdict = last ? "fail" : "pass";
      } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto k : pos) {
          const double x = static_cast<double>(ns[k]), y = std::log(freqs[k]);
          sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double m = static_cast<double>(pos.size());
        slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        verdict = slope <= 0.5 * bound_slope ? "pass" : "fail";
      }
      if (verdict == "fail") ++t.slope_failures;
      t.slopes.push_back({{"problem", problem}, {"policy", policy_kind_name(kind)}, {"x", xs[xi]},
                          {"epsilon", eps}, {"frequencies", freqs}, {"empirical_slope", slope},
                          {"bound_slope", bound_slope}, {"verdict", verdict}});
    }
  }
}

// ---- 4 ------------------------------------------------------------------------

bool martingale_structure(std::string& detail) {
  const auto p = shared("quad_gauss_1d");
  const auto pol = make_policy(*p, PolicyKind::moment_matching);
  Sampler s(pol, RngStream(404));
  s.run(100000);
  const History& h = s.history();
  const std::size_t blocks = 10, len = h.size() / blocks;
  std::size_t bad = 0, checks = 0;
  double worst = 0.0;
  for (int j = 0; j < 20; ++j) {
    const Point x{p->domain[0].lo + p->domain[0].width() * (j + 0.5) / 20.0};
    const double fx = p->f(x);
    for (std::size_t b = 0; b < blocks; ++b) {
      NeumaierSum sum, sq;
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) {
        const double u = p->F(x, h.theta(i)) / h.psi(i) - fx;
        sum.add(u);
        sq.add(u * u);
      }
      const double m = sum.value() / static_cast<double>(len);
      const double var = (sq.value() / static_cast<double>(len) - m * m) * static_cast<double>(len) / (len - 1.0);
      const double se = std::sqrt(var / static_cast<double>(len));
      const double z = std::fabs(m) / se;
      worst = std::max(worst, z);
      ++checks;
      if (z > 4.0) ++bad;
    }
  }
  detail = std::to_string(bad) + " of " + std::to_string(checks) +
           " block means (20 points x 10 blocks of 10^4) beyond 4 standard errors; largest |z| = " + fmt(worst, 3);
  report["4"] = {{"beyond_4se", bad}, {"checks", checks}, {"max_abs_z", worst}};
  return bad == 0;
}

// ---- 5 ------------------------------------------------------------------------

bool clt_check(PolicyKind kind, unsigned threads, std::string& detail, const std::string& key) {
  const auto p = shared("quad_gauss_1d");
  const auto pol = make_policy(*p, kind);
  const std::int64_t n = 4096;
  const int R = 2000;
  const auto set = replicate(p, pol, n, R, 50000, {4000, 1e-8, threads});
  const auto g = set.gaps();
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= R;
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  var /= (R - 1);
  std::optional<double> ct;
  if (kind != PolicyKind::fixed) ct = estimate_c_tilde(p, pol, 1000000, 777);
  const auto vm = variance_model(p, VarianceMode::B3, ct);
  const double s2 = vm.sigma2(p->true_solution_set.front());
  const bool mean_ok = std::fabs(mean) <= 4.0 * std::sqrt(var) / std::sqrt(static_cast<double>(R));
  const bool var_ok = std::fabs(var / s2 - 1.0) <= 0.15;
  const auto ks = normality_test(g, s2);
  const auto neg = normality_test(g, 4.0 * s2);
  detail = "mean " + fmt(mean) + " (limit " + fmt(4.0 * std::sqrt(var / R)) + "), variance ratio " + fmt(var / s2) +
           " (sigma2 " + fmt(s2) + "), KS " + fmt(ks.statistic) + " < " + fmt(ks.critical_value) +
           ", control KS " + fmt(neg.statistic) + (neg.passed ? " (control passed, expected failure)" : " rejects") +
           "; nonconverged " + fmt(set.nonconverged_fraction);
  report[key] = {{"mean", mean}, {"variance", var}, {"sigma2", s2}, {"ks", ks.to_json()},
                 {"control_ks", neg.to_json()}, {"c_tilde_estimated", vm.c_tilde_estimated}};
  return mean_ok && var_ok && ks.passed && !neg.passed;
}

// ---- 6 ------------------------------------------------------------------------

bool decay_check(const std::string& problem, unsigned threads, std::string& detail) {
  const auto p = shared(problem);
  const auto rep = op_small_check(p, make_policy(*p, PolicyKind::fixed), {256, 1024, 4096}, 500, 60000,
                                  {4000, 1e-8, threads});
  bool ok = true;
  for (std::size_t k = 1; k < rep.median.size(); ++k)
    if (rep.median[k] > 1.1 * rep.median[k - 1] + 1e-12) ok = false;
  detail = problem + " medians " + fmt(rep.median[0]) + ", " + fmt(rep.median[1]) + ", " + fmt(rep.median[2]) +
           " at n = 256, 1024, 4096 (R=500); q95 " + fmt(rep.q95[0]) + ", " + fmt(rep.q95[1]) + ", " +
           fmt(rep.q95[2]);
  report["6_" + problem] = rep.to_json();
  return ok;
}

// ---- 7 ------------------------------------------------------------------------

bool lindeberg_exact(std::string& detail) {
  std::size_t pairs = 0, nonzero = 0;
  std::ostringstream os;
  for (const std::string name : {"abs_uniform_1d", "quad_gauss_1d", "xdep_density_1d", "unit_mass_1d"}) {
    const auto p = shared(name);
    for (auto kind : {PolicyKind::fixed, PolicyKind::defensive_mixture}) {
      const auto d = clt_conditions(p, make_policy(*p, kind), {16, 64, 100, 256, 1000, 4096, 10000}, 7);
      for (std::size_t e = 0; e < d.lindeberg_eps.size(); ++e)
        for (std::size_t k = 0; k < d.n_schedule.size(); ++k) {
          if (d.lindeberg_eps[e] * std::sqrt(static_cast<double>(d.n_schedule[k])) > d.envelope_L) {
            ++pairs;
            if (d.lindeberg[e][k] != 0.0) ++nonzero;
          }
        }
    }
  }
  detail = std::to_string(pairs) + " (epsilon, n) pairs beyond the envelope on 4 bounded fixtures x 2 policies; " +
           std::to_string(nonzero) + " nonzero values";
  report["7"] = {{"pairs", pairs}, {"nonzero", nonzero}};
  return pairs > 0 && nonzero == 0;
}

// ---- 8 ------------------------------------------------------------------------

bool optimizer_oracle(std::string& detail) {
  std::size_t runs = 0, bad = 0;
  double worst = -1e300;
  for (const auto& name : builtin_problem_names()) {
    const auto p = shared(name);
    const PointSet grid = tensor_grid(p->domain, nodes_per_side(1024, p->dim_x));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Sampler s(make_policy(*p, PolicyKind::fixed), RngStream(seed));
      s.run(1000);
      const Estimator est(p, s.history());
      const auto prof = est.grid_profile(grid);
      const double grid_min = *std::min_element(prof.f_n.begin(), prof.f_n.end());
      const auto r = minimize(est, 4000, 1e-8);
      ++runs;
      worst = std::max(worst, r.theta_n - grid_min);
      if (r.theta_n > grid_min + 1e-8) ++bad;
    }
  }
  detail = std::to_string(bad) + " of " + std::to_string(runs) +
           " runs above the 1024-point grid minimum + tol; largest theta_n - grid min = " + fmt(worst, 3);
  report["8"] = {{"runs", runs}, {"violations", bad}, {"max_excess", worst}};
  return bad == 0;
}

// ---- 9 ------------------------------------------------------------------------

bool ground_truth(std::string& detail) {
  bool ok = true;
  std::ostringstream os;
  json j = json::object();
  for (const auto& name : builtin_problem_names()) {
    const auto r = verify_ground_truth(builtin_problem(name));
    ok = ok && r.passed && r.max_abs_objective_error < 1e-4;
    os << name << " " << fmt(r.max_abs_objective_error, 2) << (r.passed ? "" : " FAILED") << "; ";
    j[name] = r.to_json();
  }
  detail = "max |f - quadrature|: " + os.str();
  report["9"] = j;
  return ok;
}

// ---- 10 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_in(const fs::path& dir, const std::string& cli, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " > stdout.txt 2> stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool determinism(const std::string& cli, const fs::path& work, std::string& detail) {
  const std::vector<std::pair<std::string, json>> runs{
      {"estimate", {{"problem", "xdep_density_1d"}, {"n", 5000}, {"policy", "moment_matching"}, {"seed", 11},
                    {"export_history", true}}},
      {"tailbound", {{"problem", "quad_gauss_1d"}, {"n_schedule", {100, 1000}}, {"R", 400},
                     {"epsilon", {0.1, 0.2, 0.4}}, {"epsilon_relative", true}, {"delta", 0.05},
                     {"refine_delta", true}, {"policy", "defensive_mixture"}, {"seed", 12}}},
      {"clt", {{"problem", "xdep_density_1d"}, {"n", 256}, {"R", 200}, {"seed", 13}}},
      {"conditions", {{"problem", "abs_uniform_1d"}, {"n_schedule", {100, 1000, 10000}}, {"seed", 14}}},
      {"verify-problem", {{"problem", "quad_gauss_2d"}}},
  };
  std::size_t files = 0, mismatches = 0;
  std::string failures;
  for (const auto& [cmd, cfg] : runs) {
    std::vector<fs::path> dirs;
    std::vector<int> codes;
    int variant = 0;
    for (const char* threads : {"1", "1", "4"}) {
      const fs::path d = work / "determinism" / (cmd + "_" + std::to_string(variant++));
      fs::remove_all(d);
      fs::create_directories(d);
      std::ofstream(d / "config.json") << cfg.dump();
      codes.push_back(run_in(d, cli, cmd + " --config config.json --threads " + threads + " --output_dir=out"));
      dirs.push_back(d / "out");
    }
    if (codes[0] != codes[1] || codes[0] != codes[2] || (codes[0] != 0 && codes[0] != 4)) {
      ++mismatches;
      failures += cmd + " exit codes differ or failed; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      ++files;
      const std::string a = slurp(dirs[0] / name);
      if (a != slurp(dirs[1] / name) || a != slurp(dirs[2] / name)) {
        ++mismatches;
        failures += cmd + "/" + name.string() + " differs; ";
      }
    }
  }
  detail = std::to_string(files) + " output files from 5 commands compared across two single-threaded runs and one "
           "4-thread run; " + std::to_string(mismatches) + " mismatches" + (failures.empty() ? "" : ": " + failures);
  report["10"] = {{"files", files}, {"mismatches", mismatches}};
  return files > 0 && mismatches == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, workdir = "acceptance_runs";
  unsigned threads = 1;
  int R = 10000;
  app.add_option("--cli", cli, "Path to the amis executable")->required();
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--replications", R, "Replications for the soundness sweep");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  criterion(1, "entropy and bound algebra", entropy_algebra);

  SoundnessTally tally;
  std::string sweep_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::uint64_t seed = 1000000;
    for (const std::string problem : {"quad_gauss_1d", "abs_uniform_1d"})
      for (auto kind : {PolicyKind::fixed, PolicyKind::defensive_mixture}) {
        soundness_run(problem, kind, R, seed, threads, tally);
        seed += 1000000;
      }
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const double sweep_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report["2_3_rows"] = tally.rows;
  report["3_slopes"] = tally.slopes;
  criterion(2, "pointwise concentration soundness", [&](std::string& d) {
    if (!sweep_error.empty()) throw std::runtime_error(sweep_error);
    d = std::to_string(tally.point_violations) + " violations in " + std::to_string(tally.point_rows) +
        " comparisons (2 problems x 2 policies x n in {1e2,1e3,1e4} x 3 epsilons, one- and two-sided, R=" +
        std::to_string(R) + "); largest excess over bound + 3 stderr " + fmt(tally.worst_point_excess, 3) +
        "; shared sweep " + fmt(sweep_secs, 3) + " s (limit 600 s)";
    return tally.point_violations == 0 && sweep_secs < 600.0;
  });
  criterion(3, "uniform concentration soundness and decay", [&](std::string& d) {
    if (!sweep_error.empty()) throw std::runtime_error(sweep_error);
    const std::size_t informative = tally.slope_series - tally.slope_vacuous;
    d = std::to_string(tally.uniform_violations) + " violations in " + std::to_string(tally.uniform_rows) +
        " comparisons on a 101-point grid; covering radius 0.05 refined in " + std::to_string(tally.uniform_refined) +
        " cases to meet the bound's preconditions; decay slope failures " + std::to_string(tally.slope_failures) +
        " of " + std::to_string(informative) + " informative series (" + std::to_string(tally.slope_vacuous) +
        " all-zero)";
    return tally.uniform_violations == 0 && tally.slope_failures == 0 && informative > 0;
  });
  criterion(4, "martingale difference structure", martingale_structure);
  criterion(5, "limit law of the optimal value (fixed proposal)", [&](std::string& d) {
    const auto t = std::chrono::steady_clock::now();
    const bool ok = clt_check(PolicyKind::fixed, threads, d, "5");
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    d += "; " + fmt(s, 3) + " s (limit 900 s)";
    return ok && s < 900.0;
  });
  criterion(5, "limit law of the optimal value (defensive mixture)",
            [&](std::string& d) { return clt_check(PolicyKind::defensive_mixture, threads, d, "5_defensive"); });
  criterion(6, "optimal-value gap decay", [&](std::string& d) { return decay_check("xdep_density_1d", threads, d); });
  criterion(6, "optimal-value gap decay", [&](std::string& d) { return decay_check("quad_gauss_1d", threads, d); });
  criterion(7, "Lindeberg surrogate exactness", lindeberg_exact);
  criterion(8, "optimizer grid oracle", optimizer_oracle);
  criterion(9, "ground-truth verification", ground_truth);
  criterion(10, "CLI determinism", [&](std::string& d) { return determinism(fs::absolute(cli).string(), fs::absolute(workdir), d); });

  std::size_t failed = 0;
  json summary = json::array();
  for (const auto& l : lines) {
    failed += !l.pass;
    summary.push_back({{"criterion", l.id}, {"name", l.name}, {"pass", l.pass}, {"detail", l.detail},
                       {"seconds", l.seconds}});
  }
  report["summary"] = summary;
  write_text_file((fs::path(workdir) / "acceptance_report.json").string(), dump_json(report));
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion lines failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
