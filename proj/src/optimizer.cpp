#include "amis/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amis/errors.hpp"

namespace amis {

using nlohmann::json;

json OptimizationResult::to_json() const {
  return json{{"theta_n", theta_n},
              {"minimizers", minimizers},
              {"evaluations", evaluations},
              {"tolerance_achieved", tolerance_achieved},
              {"converged", converged}};
}

namespace {

struct Counter {
  const Objective& fn;
  int budget;
  int used = 0;
  double best = std::numeric_limits<double>::infinity();
  Point best_x;

  bool eval(const Point& x, double& v) {
    if (used >= budget) return false;
    ++used;
    v = fn(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
    return true;
  }
};

struct SearchEnd {
  Point x;
  double value;
  double step;
  bool finished;
};

SearchEnd compass_search(Counter& c, const Box& box, Point x, double v, std::vector<double> step, double tol) {
  const std::size_t m = box.dim();
  auto max_step = [&] { return *std::max_element(step.begin(), step.end()); };
  Point trial(m), best_trial(m);
  while (max_step() >= tol) {
    double best_v = v;
    bool moved = false;
    for (std::size_t d = 0; d < m; ++d) {
      for (int sgn : {-1, 1}) {
        trial = x;
        trial[d] = std::clamp(x[d] + sgn * step[d], box[d].lo, box[d].hi);
        if (trial[d] == x[d]) continue;
        double tv;
        if (!c.eval(trial, tv)) return {x, v, max_step(), false};
        if (tv < best_v) {
          best_v = tv;
          best_trial = trial;
          moved = true;
        }
      }
    }
    if (moved) {
      x = best_trial;
      v = best_v;
    } else {
      for (double& s : step) s *= 0.5;
    }
  }
  return {x, v, max_step(), true};
}

}  // namespace

OptimizationResult minimize(const Objective& fn, const Box& box, const MinimizeOptions& opt) {
  if (opt.budget < 100) throw InputError("minimize: budget must be at least 100");
  if (!(opt.tol > 0.0)) throw InputError("minimize: tol must be positive");
  if (opt.grid_per_dim < 32) throw InputError("minimize: grid needs at least 32 points per dimension");
  const std::size_t m = box.dim();
  Counter c{fn, opt.budget, 0, std::numeric_limits<double>::infinity(), {}};

  const PointSet grid = tensor_grid(box, opt.grid_per_dim);
  const std::size_t G = opt.grid_per_dim;
  std::vector<double> values(grid.size(), std::numeric_limits<double>::quiet_NaN());
  bool budget_hit = false;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!c.eval(grid.point(j), values[j])) {
      budget_hit = true;
      break;
    }
  }

  // discrete local minima among evaluated grid nodes
  std::vector<std::pair<double, std::size_t>> starts;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (std::isnan(values[j])) continue;
    bool local = true;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < m && local; ++d) {
      const std::size_t id = (j / stride) % G;
      for (int sgn : {-1, 1}) {
        if ((sgn < 0 && id == 0) || (sgn > 0 && id + 1 == G)) continue;
        const std::size_t nb = sgn < 0 ? j - stride : j + stride;
        if (!std::isnan(values[nb]) && values[nb] < values[j]) local = false;
      }
      stride *= G;
    }
    if (local) starts.emplace_back(values[j], j);
  }
  std::stable_sort(starts.begin(), starts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (starts.size() > opt.max_starts) starts.resize(opt.max_starts);

  std::vector<double> step0(m);
  for (std::size_t d = 0; d < m; ++d) step0[d] = box[d].width() / static_cast<double>(G - 1);

  std::vector<SearchEnd> ends;
  bool all_finished = !budget_hit;
  for (const auto& [v0, j] : starts) {
    if (c.used >= c.budget) {
      all_finished = false;
      break;
    }
    SearchEnd e = compass_search(c, box, grid.point(j), v0, step0, opt.tol);
    all_finished = all_finished && e.finished;
    ends.push_back(std::move(e));
  }

  OptimizationResult r;
  r.theta_n = c.best;
  r.evaluations = c.used;
  r.converged = all_finished;
  double tol_achieved = opt.tol;
  for (const auto& e : ends) tol_achieved = std::max(tol_achieved, e.step);
  if (!r.converged && ends.empty()) tol_achieved = std::max(tol_achieved, *std::max_element(step0.begin(), step0.end()));
  r.tolerance_achieved = tol_achieved;

  std::vector<std::pair<Point, double>> cands;
  cands.emplace_back(c.best_x, c.best);
  for (const auto& e : ends) cands.emplace_back(e.x, e.value);
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [x, v] : cands) {
    if (v > r.theta_n + opt.tol) continue;
    bool dup = false;
    for (const auto& kept : r.minimizers) dup = dup || sup_norm_distance(kept, x) <= 2.0 * opt.tol;
    if (!dup) r.minimizers.push_back(x);
  }
  std::sort(r.minimizers.begin(), r.minimizers.end());
  return r;
}

OptimizationResult minimize(const Estimator& est, int budget, double tol) {
  MinimizeOptions opt;
  opt.budget = budget;
  opt.tol = tol;
  return minimize([&est](std::span<const double> x) { return est.evaluate_fn(x); }, est.problem().domain, opt);
}

double inf_over_set(const Estimator& est, const std::vector<Point>& points) {
  if (points.empty()) throw InputError("inf_over_set: empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : points) best = std::min(best, est.evaluate_fn(x));
  return best;
}

}  // namespace amis
