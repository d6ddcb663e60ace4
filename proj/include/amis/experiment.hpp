#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "amis/asymptotics.hpp"
#include "amis/problem.hpp"
#include "amis/sampler.hpp"

namespace amis {

/// Flat experiment configuration shared by all commands.
struct ExperimentConfig {
  std::string problem;  // builtin name or path to a problem JSON file
  std::string policy = "fixed";
  int update_period = 100;
  double defensive_weight = 0.5;
  nlohmann::json proposal;  // null, density object, or path to a density JSON file
  std::int64_t n = 0;
  std::vector<std::int64_t> n_schedule;
  int R = 0;
  std::vector<double> epsilon;
  bool epsilon_relative = false;
  double delta = 0.0;  // 0 means no uniform variant
  bool refine_delta = false;
  std::vector<Point> x_eval;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int grid_points = 101;
  int budget = 4000;
  double tol = 1e-8;
  bool export_history = false;
  std::string replay;  // history CSV to evaluate instead of sampling
  std::string variance_mode = "B3";

  static ExperimentConfig parse(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Merges a config file, AMIS_SEED-style seed text and --key=value overrides
/// (later sources win: file, env seed, overrides).
nlohmann::json resolve_config(const std::string& file_text, const std::vector<std::string>& overrides,
                              const std::string& env_seed);

/// Parses a single override value: JSON literal, comma-separated numbers, or bare string.
nlohmann::json parse_override_value(const std::string& text);

ProblemPtr load_problem(const std::string& name_or_path);
AdaptionPolicy load_policy(const ExperimentConfig& c, const ProblemInstance& p);

struct CommandResult {
  int exit_code = 0;
  std::string message;
  std::vector<std::string> files;
};

std::vector<std::string> command_names();

/// Validates then runs a command. Never throws: failures map to exit codes
/// 2 (configuration), 3 (runtime), 4 (a check reported by the command failed).
CommandResult run_command(const std::string& command, const nlohmann::json& config, unsigned threads);

/// H_n values at fixed points and grid suprema along R independent chains.
struct DeviationSweep {
  std::vector<std::int64_t> ns;
  std::vector<Point> xs;
  std::vector<std::vector<std::vector<double>>> H;  // [n][x][rep]
  std::vector<std::vector<double>> sup_H;           // [n][rep], one-sided sup over the grid
  std::vector<std::vector<double>> sup_abs_H;       // [n][rep]
};

DeviationSweep deviation_sweep(const ProblemPtr& p, const AdaptionPolicy& policy, const std::vector<Point>& xs,
                               const std::vector<std::int64_t>& ns, int R, std::uint64_t seed,
                               const PointSet* grid, unsigned threads);

}  // namespace amis
