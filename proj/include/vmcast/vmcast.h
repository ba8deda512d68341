/* C interface to the vmcast simulator. All handles are opaque; every
 * function that can fail returns a vmc_status and records a message
 * retrievable with vmc_last_error() on the calling thread. Strings handed
 * out through char** parameters must be released with vmc_string_free(). */
#ifndef VMCAST_H
#define VMCAST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VMC_API __declspec(dllexport)
#else
#define VMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vmc_status {
  VMC_OK = 0,
  VMC_ERR_INVALID_ARGUMENT = 1,
  VMC_ERR_PAST_EVENT = 2,
  VMC_ERR_EMPTY_FLEET = 3,
  VMC_ERR_INVALID_SCENARIO = 4,
  VMC_ERR_INVALID_PLAN = 5,
  VMC_ERR_MALFORMED_RECORD = 6,
  VMC_ERR_PDR_UNDEFINED = 7,
  VMC_ERR_EED_UNDEFINED = 8,
  VMC_ERR_THROUGHPUT_UNDEFINED = 9,
  VMC_ERR_NRL_UNDEFINED = 10,
  VMC_ERR_INCOMPLETE_MATRIX = 11,
  VMC_ERR_IO = 12,
  VMC_ERR_BUDGET_EXCEEDED = 13,
  VMC_ERR_INTERNAL = 14
} vmc_status;

typedef enum vmc_metric {
  VMC_METRIC_PDR = 0,
  VMC_METRIC_AVG_EED = 1,              /* seconds, total delay / packets sent */
  VMC_METRIC_AVG_EED_PER_RECEIVED = 2, /* seconds, total delay / receptions */
  VMC_METRIC_THROUGHPUT = 3,           /* Kbps */
  VMC_METRIC_NRL = 4
} vmc_metric;

typedef struct vmc_counts {
  uint64_t data_sent;
  uint64_t data_received;
  uint64_t counted_received;
  uint64_t expected;
  uint64_t control_sent;
  uint64_t received_bytes;
} vmc_counts;

typedef struct vmc_config vmc_config;
typedef struct vmc_report vmc_report;

/* Optional outputs of vmc_run. NULL members are skipped. */
typedef struct vmc_run_options {
  const char* trace_path;     /* TR trace file */
  const char* mobility_path;  /* "t node x y" per node and tick */
  const char* plan_in_path;   /* replay this session plan */
  const char* plan_out_path;  /* dump the session plan used */
} vmc_run_options;

typedef void (*vmc_progress_fn)(const char* line, void* user);

typedef struct vmc_matrix_options {
  const char* out_dir;  /* traces and report.csv; NULL keeps nothing */
  int paper_matrix;     /* nonzero: 24-scenario grid built from the first config */
  uint64_t seed;        /* used when paper_matrix is set */
  size_t reps;          /* 0 behaves like 1 */
  size_t workers;       /* 0 behaves like 1 */
  int keep_traces;
  vmc_progress_fn progress;
  void* user;
} vmc_matrix_options;

VMC_API const char* vmc_version(void);
VMC_API const char* vmc_status_name(vmc_status status);
VMC_API const char* vmc_last_error(void);
VMC_API void vmc_string_free(char* s);

VMC_API vmc_status vmc_config_create(vmc_config** out);
VMC_API void vmc_config_destroy(vmc_config* cfg);
VMC_API vmc_status vmc_config_clone(const vmc_config* cfg, vmc_config** out);
VMC_API vmc_status vmc_config_load(const char* path, vmc_config** out);
VMC_API vmc_status vmc_config_from_json(const char* json, vmc_config** out);
VMC_API vmc_status vmc_config_save(const vmc_config* cfg, const char* path);
VMC_API vmc_status vmc_config_to_json(const vmc_config* cfg, char** out);
/* Dotted keys, e.g. "listeners" or "radio.loss_probability". */
VMC_API vmc_status vmc_config_set(vmc_config* cfg, const char* key, const char* value);
VMC_API vmc_status vmc_config_get(const vmc_config* cfg, const char* key, char** out);
/* On failure *errors (if non-NULL) receives every violation, one per line. */
VMC_API vmc_status vmc_config_validate(const vmc_config* cfg, char** errors);
VMC_API vmc_status vmc_config_scenario_id(const vmc_config* cfg, char** out);

VMC_API vmc_status vmc_run(const vmc_config* cfg, const vmc_run_options* opts, vmc_report** out);
VMC_API vmc_status vmc_analyze(const char* trace_path, vmc_report** out);
VMC_API void vmc_report_destroy(vmc_report* report);
/* Returns the matching *_UNDEFINED status when the denominator was zero. */
VMC_API vmc_status vmc_report_metric(const vmc_report* report, vmc_metric metric, double* out);
VMC_API vmc_status vmc_report_counts(const vmc_report* report, vmc_counts* out);
/* "scenario,protocol,L,S,pdr,avg_eed_s,throughput_kbps,nrl" without newline. */
VMC_API vmc_status vmc_report_csv_row(const vmc_report* report, char** out);
VMC_API const char* vmc_csv_header(void);

/* Runs `n` configs (or the 24-scenario grid). *csv receives the report text and
 * *failed the number of scenarios that did not complete. */
VMC_API vmc_status vmc_matrix_run(const vmc_config* const* configs, size_t n, const vmc_matrix_options* opts,
                                  char** csv, size_t* failed);

/* Evaluates the protocol comparison trends over report CSV text. *table
 * receives one "PASS|FAIL|SKIP  name: detail" line per trend. */
VMC_API vmc_status vmc_trends(const char* csv_text, char** table, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
