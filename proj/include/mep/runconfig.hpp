#pragma once

#include <optional>
#include <string>

#include "mep/pursuit.hpp"
#include "mep/targets.hpp"

namespace mep::cli {

struct TargetSpec {
  std::string name;
  // gaussian_mixture parameters
  std::vector<Vec> means;
  std::vector<Vec> vars;
  Vec weights;
  // scalar parameters (std_normal / two_mode / banana)
  int dim = 1;
  double separation = 3.0;
  double curvature = 1.0;
  double scale = 1.0;
};

struct DiagnosticsConfig {
  Vec lambda_list = {0.5, 1.0, 2.0};
  std::optional<Box> box;
  std::size_t resolution = 2001;
  Vec taylor_alphas = {1e-1, 1e-2, 1e-3};
};

struct ContinualConfig {
  std::optional<std::string> data_dir;
  std::vector<std::vector<int>> class_pairs = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
  std::size_t pca_dim = 16;
  std::size_t ensemble_n = 32;
  std::size_t synthetic_train_per_class = 200;
  std::size_t synthetic_test_per_class = 100;
  double synthetic_noise_std = 0.7;
  std::size_t baseline_steps = 500;
  double baseline_learn_rate = 0.05;
};

struct RunConfig {
  std::optional<TargetSpec> target;
  pursuit::PursuitConfig pursuit;
  DiagnosticsConfig diagnostics;
  ContinualConfig continual;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

// Strict parse: unknown keys and constraint violations raise ConfigError with
// the offending key path.
RunConfig parse_config(const std::string& json_text);

std::string serialize_config(const RunConfig& cfg);

// Instantiate the named target. Throws ConfigError for unregistered names.
targets::TargetModel build_target(const TargetSpec& spec);

}  // namespace mep::cli
