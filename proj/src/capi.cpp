#include "mep.h"

#include <string>

#include "mep/runner.hpp"
#include "mep/variational.hpp"

struct mep_config {
  mep::cli::RunConfig cfg;
};

struct mep_mixture {
  mep::variational::MixtureApprox q;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
mep_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MEP_OK;
  } catch (const mep::ConfigError& e) {
    g_last_error = e.what();
    return MEP_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MEP_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

const char* mep_version(void) { return "0.1.0"; }

const char* mep_last_error(void) { return g_last_error.c_str(); }

mep_status mep_config_parse(const char* json_text, mep_config** out) {
  if (!json_text || !out) {
    g_last_error = "mep_config_parse: null argument";
    return MEP_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] { *out = new mep_config{mep::cli::parse_config(json_text)}; });
}

void mep_config_free(mep_config* cfg) { delete cfg; }

mep_status mep_config_set_seed(mep_config* cfg, uint64_t seed) {
  if (!cfg) {
    g_last_error = "mep_config_set_seed: null config";
    return MEP_ERR_CONFIG;
  }
  cfg->cfg.seed = seed;
  cfg->cfg.pursuit.seed = seed;
  g_last_error.clear();
  return MEP_OK;
}

mep_status mep_config_set_output_dir(mep_config* cfg, const char* dir) {
  if (!cfg || !dir) {
    g_last_error = "mep_config_set_output_dir: null argument";
    return MEP_ERR_CONFIG;
  }
  cfg->cfg.output_dir = dir;
  g_last_error.clear();
  return MEP_OK;
}

mep_status mep_run_fit(const mep_config* cfg) {
  if (!cfg) {
    g_last_error = "mep_run_fit: null config";
    return MEP_ERR_CONFIG;
  }
  return guarded([&] { mep::cli::run_fit(cfg->cfg); });
}

mep_status mep_run_diagnose(const mep_config* cfg) {
  if (!cfg) {
    g_last_error = "mep_run_diagnose: null config";
    return MEP_ERR_CONFIG;
  }
  return guarded([&] { mep::cli::run_diagnose(cfg->cfg); });
}

mep_status mep_run_continual(const mep_config* cfg) {
  if (!cfg) {
    g_last_error = "mep_run_continual: null config";
    return MEP_ERR_CONFIG;
  }
  return guarded([&] { mep::cli::run_continual(cfg->cfg); });
}

mep_status mep_mixture_parse(const char* json_text, mep_mixture** out) {
  if (!json_text || !out) {
    g_last_error = "mep_mixture_parse: null argument";
    return MEP_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] { *out = new mep_mixture{mep::variational::mixture_from_json(json_text)}; });
}

void mep_mixture_free(mep_mixture* q) { delete q; }

int mep_mixture_dim(const mep_mixture* q) { return q ? static_cast<int>(q->q.dim()) : -1; }

int mep_mixture_components(const mep_mixture* q) { return q ? static_cast<int>(q->q.size()) : -1; }

mep_status mep_mixture_log_pdf(const mep_mixture* q, const double* theta, size_t dim, double* out) {
  if (!q || !theta || !out) {
    g_last_error = "mep_mixture_log_pdf: null argument";
    return MEP_ERR_CONFIG;
  }
  return guarded([&] {
    *out = mep::variational::mixture_log_pdf(q->q, mep::Vec(theta, theta + dim));
  });
}

}  // extern "C"
