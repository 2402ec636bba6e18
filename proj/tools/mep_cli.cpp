// Command-line front end. Links only the C API of the shared library.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mep.h"

namespace {

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& out_dir,
                mep_status (*command)(const mep_config*)) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file " << config_path << "\n";
    return MEP_ERR_CONFIG;
  }
  std::ostringstream text;
  text << in.rdbuf();

  mep_config* cfg = nullptr;
  mep_status st = mep_config_parse(text.str().c_str(), &cfg);
  if (st != MEP_OK) {
    std::cerr << "error: " << mep_last_error() << "\n";
    return st;
  }
  if (seed) mep_config_set_seed(cfg, *seed);
  if (out_dir) mep_config_set_output_dir(cfg, out_dir->c_str());

  st = command(cfg);
  if (st != MEP_OK) std::cerr << "error: " << mep_last_error() << "\n";
  mep_config_free(cfg);
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MaxEntropy pursuit variational inference"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "override the config output directory");
  };

  auto* fit = app.add_subcommand("fit", "greedy mixture fit of the configured target");
  auto* diagnose = app.add_subcommand("diagnose", "temperature / expansion / identity reports");
  auto* continual_cmd = app.add_subcommand("continual", "sequential-task learning harness");
  add_common(fit);
  add_common(diagnose);
  add_common(continual_cmd);

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return run_command(config_path, seed, out_dir, &mep_run_fit);
  if (diagnose->parsed()) return run_command(config_path, seed, out_dir, &mep_run_diagnose);
  return run_command(config_path, seed, out_dir, &mep_run_continual);
}
