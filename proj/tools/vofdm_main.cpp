#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vofdm/experiment.hpp"
#include "vofdm/version.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f.good())
    throw std::invalid_argument("cannot read config file: " + path);
  return nlohmann::json::parse(f);
}

// key uses dots for nesting: noise.p=0.1 sets /noise/p.  The value is parsed
// as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& cfg, const std::string& kv) {
  const std::size_t eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key=value: " + kv);
  std::string pointer = "/" + kv.substr(0, eq);
  for (char& c : pointer)
    if (c == '.') c = '/';
  const std::string value = kv.substr(eq + 1);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  cfg[nlohmann::json::json_pointer(pointer)] = parsed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vector-OFDM simulation lab for impulsive-noise front-ends"};
  app.set_version_flag("--version", std::string(vofdm::kArtifactName) + " " +
                                        vofdm::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  unsigned threads = 0;
  std::vector<std::string> overrides;

  CLI::App* run =
      app.add_subcommand("run", "run an experiment, write CSV and manifest");
  run->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory (default: .)");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the config seed");
  CLI::Option* trials_opt =
      run->add_option("--trials", trials, "override the config trial count");
  CLI::Option* threads_opt = run->add_option(
      "--threads", threads, "override the config thread count (0 = hardware)");
  run->add_option("--override", overrides,
                  "config override as dotted.path=value, repeatable");

  CLI::App* validate =
      app.add_subcommand("validate", "check a config and print diagnostics");
  validate->add_option("--config", config_path, "experiment config (JSON)")
      ->required();

  CLI::App* list =
      app.add_subcommand("list-experiments", "list available experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& [name, description] :
           vofdm::ExperimentConfig::catalog())
        std::cout << name << "\t" << description << "\n";
      return 0;
    }

    nlohmann::json user = load_config(config_path);
    for (const std::string& kv : overrides) apply_override(user, kv);
    if (seed_opt->count() > 0) user["seed"] = seed;
    if (trials_opt->count() > 0) user["trials"] = trials;
    if (threads_opt->count() > 0) user["threads"] = threads;

    vofdm::ExperimentConfig cfg = vofdm::ExperimentConfig::from_json(user);

    if (validate->parsed()) {
      std::vector<std::string> issues = cfg.validate();
      if (issues.empty()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const std::string& issue : issues) std::cout << issue << "\n";
      return 1;
    }

    vofdm::RunResult result = cfg.run(out_dir);
    std::cout << "wrote " << result.csv_path << " (" << result.n_rows
              << " rows)\n";
    std::cout << "wrote " << result.manifest_path << "\n";
    std::cout << "manifest_sha256 " << result.manifest_sha256 << "\n";
    std::cout << "duration_seconds " << result.duration_seconds << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
