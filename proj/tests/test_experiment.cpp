#include <doctest.h>

#include <filesystem>

#include "amis/errors.hpp"
#include "amis/estimator.hpp"
#include "amis/experiment.hpp"
#include "amis/io.hpp"

using namespace amis;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("amis_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parse and serialise are idempotent") {
  const json raw = json::parse(R"({"problem":"quad_gauss_1d","n":1000,"epsilon":[0.1,0.2],
      "x_eval":[0.3,[0.5]],"seed":18446744073709551615,"policy":"defensive_mixture"})");
  const auto c = ExperimentConfig::parse(raw);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.x_eval.size() == 2);
  const json once = c.to_json();
  const json twice = ExperimentConfig::parse(once).to_json();
  CHECK(once == twice);
  CHECK(dump_json(once) == dump_json(twice));
}

TEST_CASE("config errors name the field") {
  auto msg = [](const char* text) {
    try {
      ExperimentConfig::parse(json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(R"({"n":"ten"})").find("'n'") != std::string::npos);
  CHECK(msg(R"({"colour":1})").find("'colour'") != std::string::npos);
  CHECK(msg(R"({"seed":-1})").find("'seed'") != std::string::npos);
  CHECK(msg(R"({"epsilon":[0.1,"x"]})").find("'epsilon'") != std::string::npos);
}

TEST_CASE("override values and precedence") {
  CHECK(parse_override_value("12") == json(12));
  CHECK(parse_override_value("0.1,0.2") == json::array({0.1, 0.2}));
  CHECK(parse_override_value("true") == json(true));
  CHECK(parse_override_value("quad_gauss_1d") == json("quad_gauss_1d"));
  CHECK(parse_override_value("[[0.1,0.2]]") == json::parse("[[0.1,0.2]]"));
  const std::string file = R"({"problem":"quad_gauss_1d","seed":1,"n":5})";
  CHECK(resolve_config(file, {}, "")["seed"] == 1);
  CHECK(resolve_config(file, {}, "7")["seed"] == 7);
  CHECK(resolve_config(file, {"--seed=9"}, "7")["seed"] == 9);
  CHECK(resolve_config(file, {"--n=64"}, "")["n"] == 64);
  CHECK_THROWS_AS(resolve_config(file, {}, "abc"), ConfigError);
  CHECK_THROWS_AS(resolve_config(file, {"--n"}, ""), ConfigError);
  CHECK_THROWS_AS(resolve_config("[1,2]", {}, ""), ConfigError);
}

TEST_CASE("commands validate before running") {
  const auto dir = scratch("validate");
  json c = {{"output_dir", dir.string()}};
  auto r = run_command("estimate", c, 1);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("problem") != std::string::npos);
  c["problem"] = "quad_gauss_1d";
  c["n"] = 1000;
  c["R"] = 10;
  r = run_command("clt", c, 1);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("'R'") != std::string::npos);
  CHECK(run_command("no-such", c, 1).exit_code == 2);
  c["problem"] = "missing_problem.json";
  CHECK(run_command("estimate", c, 1).exit_code == 2);
  c["problem"] = "quad_gauss_1d";
  c["x_eval"] = json::array({2.0});
  CHECK(run_command("tailbound", c, 1).exit_code == 2);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("estimate writes a profile and replays its own history") {
  const auto dir = scratch("estimate");
  json c = {{"problem", "xdep_density_1d"}, {"n", 2000}, {"seed", 5}, {"policy", "moment_matching"},
            {"export_history", true}, {"output_dir", (dir / "a").string()}};
  auto r = run_command("estimate", c, 1);
  REQUIRE(r.exit_code == 0);
  const json s = json::parse(read_text_file((dir / "a" / "summary.json").string()));
  CHECK(s.contains("theta_n"));
  const std::string profile = read_text_file((dir / "a" / "profile.csv").string());
  CHECK(profile.rfind("x_1,f_n,H_n\n", 0) == 0);
  json rc = c;
  rc.erase("n");
  rc["replay"] = (dir / "a" / "history.csv").string();
  rc["export_history"] = false;
  rc["output_dir"] = (dir / "b").string();
  REQUIRE(run_command("estimate", rc, 1).exit_code == 0);
  CHECK(read_text_file((dir / "b" / "profile.csv").string()) == profile);
  const json sb = json::parse(read_text_file((dir / "b" / "summary.json").string()));
  CHECK(sb["theta_n"] == s["theta_n"]);
}

TEST_CASE("tailbound marks rows whose epsilon exceeds the envelope") {
  const auto dir = scratch("tail");
  json c = {{"problem", "quad_gauss_1d"}, {"n", 100}, {"R", 50}, {"epsilon", {0.5, 5.0}},
            {"x_eval", {0.3}}, {"output_dir", dir.string()}};
  REQUIRE(run_command("tailbound", c, 1).exit_code == 0);
  const std::string t = read_text_file((dir / "tailbound.csv").string());
  std::size_t lines = 0;
  for (char ch : t) lines += ch == '\n';
  CHECK(lines == 3);
  CHECK(t.find("skipped: pointwise bound") != std::string::npos);
  const json s = json::parse(read_text_file((dir / "tailbound_summary.json").string()));
  CHECK(s["skipped_rows"] == 1);
}

TEST_CASE("tailbound with an adaptive policy skips every row") {
  const auto dir = scratch("tail_adapt");
  json c = {{"problem", "quad_gauss_1d"}, {"n", 200}, {"R", 20}, {"epsilon", {0.5}},
            {"policy", "moment_matching"}, {"output_dir", dir.string()}};
  REQUIRE(run_command("tailbound", c, 1).exit_code == 0);
  const json s = json::parse(read_text_file((dir / "tailbound_summary.json").string()));
  CHECK(s["skipped_rows"] == s["rows"]);
}

TEST_CASE("clt on a multi-minimizer fixture reports a distribution only") {
  const auto dir = scratch("clt_multi");
  json c = {{"problem", "double_well_1d"}, {"n", 256}, {"R", 100}, {"output_dir", dir.string()}};
  const auto r = run_command("clt", c, 2);
  REQUIRE(r.exit_code == 0);
  const json s = json::parse(read_text_file((dir / "normality.json").string()));
  CHECK_FALSE(s.contains("ks"));
  CHECK(s["passed"].is_null());
  CHECK(s["gaps"].contains("median"));
}

TEST_CASE("verify-problem and conditions") {
  const auto dir = scratch("verify");
  json c = {{"problem", "abs_uniform_1d"}, {"output_dir", dir.string()}, {"n_schedule", {100, 1000}}};
  CHECK(run_command("verify-problem", c, 1).exit_code == 0);
  CHECK(run_command("conditions", c, 1).exit_code == 0);
  CHECK(fs::exists(dir / "verification.json"));
  CHECK(fs::exists(dir / "conditions.json"));
}

TEST_CASE("problem files reference templates") {
  const auto dir = scratch("problem_file");
  write_text_file((dir / "p.json").string(), R"({"template":"quad_gauss_1d","params":{"center":[0.6]}})");
  const auto p = load_problem((dir / "p.json").string());
  CHECK(p->true_solution_set.front()[0] == doctest::Approx(0.6));
  write_text_file((dir / "bad.json").string(), R"({"template":"quad_gauss_1d","params":{"centre":[0.6]}})");
  CHECK_THROWS_AS(load_problem((dir / "bad.json").string()), ConfigError);
}

TEST_CASE("deviation sweep snapshots match separate chains") {
  const auto p = std::make_shared<const ProblemInstance>(builtin_problem("quad_gauss_1d"));
  const auto pol = make_policy(*p, PolicyKind::defensive_mixture);
  const PointSet grid = tensor_grid(p->domain, 11);
  const auto sw = deviation_sweep(p, pol, {{0.3}}, {100, 400}, 3, 21, &grid, 2);
  for (int r = 0; r < 3; ++r) {
    Sampler s(pol, RngStream(21 + r));
    s.run(400);
    const Estimator full(p, s.history());
    const Estimator part(p, s.history().prefix(100));
    CHECK(sw.H[1][0][r] == doctest::Approx(full.deviation(std::vector<double>{0.3}).H_n).epsilon(1e-12));
    CHECK(sw.H[0][0][r] == doctest::Approx(part.deviation(std::vector<double>{0.3}).H_n).epsilon(1e-12));
    CHECK(sw.sup_abs_H[1][r] == doctest::Approx(full.grid_profile(grid).sup_abs_H).epsilon(1e-12));
  }
}
