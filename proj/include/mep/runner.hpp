#pragma once

#include "mep/runconfig.hpp"

namespace mep::cli {

// Each command writes its artifacts under cfg.output_dir and throws on
// failure (ConfigError for bad input, std::runtime_error otherwise).
void run_fit(const RunConfig& cfg);       // trace.csv, mixture.json, summary.json
void run_diagnose(const RunConfig& cfg);  // diagnostics.csv
void run_continual(const RunConfig& cfg); // accuracy.csv, stage_<k>_mixture.json

}  // namespace mep::cli
