// xps: scenario runner for the extended phase space toolkit.
#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "extphase/cli/config.hpp"
#include "extphase/cli/runner.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Prints errors and returns the parsed config, or nullopt.
std::optional<xps::cli::ScenarioConfig> load(const std::string& path) {
  auto text = slurp(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return std::nullopt;
  }
  auto v = xps::cli::validate(*text);
  if (!v.ok()) {
    for (const auto& e : v.errors) std::cerr << path << ": " << e << "\n";
    return std::nullopt;
  }
  return v.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended phase space scenario runner"};
  app.require_subcommand(1);

  std::string cfg_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("config", cfg_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "random seed (overrides seed)");

  std::string val_path;
  auto* val = app.add_subcommand("validate", "check a config and print it with defaults filled");
  val->add_option("config", val_path, "config file")->required();

  app.add_subcommand("list", "print scenario schemas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (app.got_subcommand("list")) {
    std::cout << xps::cli::describe_schemas();
    return kPass;
  }
  if (app.got_subcommand("validate")) {
    auto cfg = load(val_path);
    if (!cfg) return kUsage;
    std::cout << cfg->to_json().dump(2) << "\n";
    return kPass;
  }

  auto cfg = load(cfg_path);
  if (!cfg) return kUsage;
  if (!out_dir.empty()) cfg->output_dir = out_dir;
  if (seed) cfg->seed = *seed;
  try {
    const auto rep = xps::cli::run(*cfg);
    std::cout << rep.scenario << ": " << (rep.pass ? "PASS" : "FAIL");
    if (!rep.diagnostic.empty()) std::cout << " (" << rep.diagnostic << ")";
    std::cout << "\n" << rep.metrics.dump(2) << "\n";
    return rep.pass ? kPass : kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
