#ifndef HWAVE_HWAVE_H
#define HWAVE_HWAVE_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HWAVE_API __declspec(dllexport)
#else
#define HWAVE_API __attribute__((visibility("default")))
#endif

/* Status of an API call. Run outcomes are reported separately through
   hwave_run_exit_code. */
typedef enum hwave_status {
  HWAVE_OK = 0,
  HWAVE_ERR_ARGUMENT = 1, /* null pointer or bad argument */
  HWAVE_ERR_IO = 2,       /* a report file could not be written */
  HWAVE_ERR_INTERNAL = 3
} hwave_status;

/* Exit codes of a run. */
enum {
  HWAVE_EXIT_PASS = 0,
  HWAVE_EXIT_FAIL = 1,
  HWAVE_EXIT_CONFIG = 2,
  HWAVE_EXIT_NUMERICAL = 3
};

typedef struct hwave_run_options {
  int threads; /* 0 keeps the OpenMP default */
  int strict;  /* nonzero: unconverged sums give HWAVE_EXIT_NUMERICAL */
} hwave_run_options;

typedef struct hwave_run hwave_run;

HWAVE_API const char* hwave_version(void);
/* Message of the last failed call on this thread, or "". */
HWAVE_API const char* hwave_last_error(void);

/* Parse and execute a run configuration. On HWAVE_OK *out holds a run whose
   exit code may still report a failed check or a configuration error.
   opts may be null. */
HWAVE_API hwave_status hwave_run_json(const char* config_json, const hwave_run_options* opts, hwave_run** out);
HWAVE_API hwave_status hwave_run_file(const char* config_path, const hwave_run_options* opts, hwave_run** out);

HWAVE_API int hwave_run_exit_code(const hwave_run* run);
/* Strings stay valid until hwave_run_free. */
HWAVE_API const char* hwave_run_report(const hwave_run* run);
HWAVE_API const char* hwave_run_timings(const hwave_run* run);
HWAVE_API const char* hwave_run_summary(const hwave_run* run);
HWAVE_API const char* hwave_run_error(const hwave_run* run);

/* Write the report, timings.json and CSV files; relative output paths of the
   configuration resolve against out_dir. */
HWAVE_API hwave_status hwave_run_write(const hwave_run* run, const char* out_dir);

HWAVE_API void hwave_run_free(hwave_run* run);

/* Names of the registered signal builders and checks, comma separated. */
HWAVE_API const char* hwave_builder_names(void);
HWAVE_API const char* hwave_check_names(void);

#ifdef __cplusplus
}
#endif

#endif
