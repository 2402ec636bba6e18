/* C API for the maxent-pursuit shared library. All functions return
 * mep_status; on failure mep_last_error() carries a human-readable message
 * for the calling thread. Handles are opaque and freed by their _free
 * function. */
#ifndef MEP_H
#define MEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MEP_OK = 0,
  MEP_ERR_RUNTIME = 1, /* execution failed */
  MEP_ERR_CONFIG = 2   /* invalid config / user input */
} mep_status;

typedef struct mep_config mep_config;
typedef struct mep_mixture mep_mixture;

const char* mep_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* mep_last_error(void);

/* Parse and validate a JSON run configuration. */
mep_status mep_config_parse(const char* json_text, mep_config** out);
void mep_config_free(mep_config* cfg);

mep_status mep_config_set_seed(mep_config* cfg, uint64_t seed);
mep_status mep_config_set_output_dir(mep_config* cfg, const char* dir);

/* Commands; artifacts are written under the config's output_dir. */
mep_status mep_run_fit(const mep_config* cfg);
mep_status mep_run_diagnose(const mep_config* cfg);
mep_status mep_run_continual(const mep_config* cfg);

/* Mixture artifact access (the mixture.json document format). */
mep_status mep_mixture_parse(const char* json_text, mep_mixture** out);
void mep_mixture_free(mep_mixture* q);
int mep_mixture_dim(const mep_mixture* q);
int mep_mixture_components(const mep_mixture* q);
mep_status mep_mixture_log_pdf(const mep_mixture* q, const double* theta, size_t dim, double* out);

#ifdef __cplusplus
}
#endif

#endif /* MEP_H */
