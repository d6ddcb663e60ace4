#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "amis.h"

namespace {

struct Owned {
  char* s = nullptr;
  ~Owned() { amis_string_free(s); }
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample average approximation with adaptive multiple importance sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", amis_version());

  std::string config_path;
  unsigned threads = 1;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"estimate", "Run one chain and write the estimated objective profile"},
      {"tailbound", "Compare concentration bounds with Monte Carlo exceedance frequencies"},
      {"clt", "Replicate the optimal-value estimator and test its limit law"},
      {"conditions", "Report surrogate diagnostics for the limit-theorem conditions"},
      {"verify-problem", "Check a problem's closed forms against quadrature"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("-c,--config", config_path, "Flat JSON config file");
    sub->add_option("-t,--threads", threads, "Worker thread cap (0 = hardware)");
    sub->footer("Any config field can be overridden with --key=value. AMIS_SEED overrides the config seed.");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<std::string> extras = sub->remaining();
  std::vector<std::string> overrides;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string a = extras[i];
    if (a.rfind("--", 0) != 0) {
      std::cerr << "error: unexpected argument '" << a << "'\n";
      return 2;
    }
    if (a.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) {
        std::cerr << "error: override '" << a << "' needs a value\n";
        return 2;
      }
      a += "=" + extras[++i];
    }
    overrides.push_back(a);
  }

  std::string file_text;
  if (!config_path.empty() && !read_file(config_path, file_text)) {
    std::cerr << "error: config file '" << config_path << "' cannot be read\n";
    return 2;
  }
  const char* env = std::getenv("AMIS_SEED");
  std::vector<const char*> ov;
  for (const auto& o : overrides) ov.push_back(o.c_str());

  Owned cfg;
  if (amis_config_resolve(file_text.c_str(), ov.data(), ov.size(), env, &cfg.s) != AMIS_OK) {
    std::cerr << "error: " << amis_last_error() << "\n";
    return 2;
  }
  int exit_code = 0;
  Owned msg;
  if (amis_run(command.c_str(), cfg.s, threads, &exit_code, &msg.s) != AMIS_OK) {
    std::cerr << "error: " << amis_last_error() << "\n";
    return 2;
  }
  (exit_code == 0 ? std::cout : std::cerr) << (exit_code == 2 || exit_code == 3 ? "error: " : "") << msg.s << "\n";
  return exit_code;
}
