#ifndef INNERVSENSE_H
#define INNERVSENSE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ISENSE_API __declspec(dllexport)
#else
#define ISENSE_API __attribute__((visibility("default")))
#endif

typedef enum isense_status {
  ISENSE_OK = 0,
  ISENSE_RANGE_ERROR,
  ISENSE_GRID_OUT_OF_RANGE,
  ISENSE_UNIT_MISMATCH,
  ISENSE_LENGTH_MISMATCH,
  ISENSE_NON_FINITE_INPUT,
  ISENSE_UNKNOWN_SCENARIO,
  ISENSE_BAD_PARAMS,
  ISENSE_INVALID_FRAME,
  ISENSE_CRC_MISMATCH,
  ISENSE_SINK_CLOSED,
  ISENSE_NON_UNIFORM_SAMPLING,
  ISENSE_CUTOFF_OUT_OF_RANGE,
  ISENSE_WINDOW_OUT_OF_RANGE,
  ISENSE_TOO_FEW_SAMPLES,
  ISENSE_EMPTY_SERIES,
  ISENSE_DEGENERATE_X,
  ISENSE_FLAT_SIGNAL,
  ISENSE_NO_DECAY,
  ISENSE_BOUNDARY_OUT_OF_RANGE,
  ISENSE_TOO_SHORT_CYCLE,
  ISENSE_EMPTY_CYCLE_SET,
  ISENSE_SERIES_TOO_SHORT,
  ISENSE_UNBALANCED_DESIGN,
  ISENSE_INSUFFICIENT_REPLICATES,
  ISENSE_DOMAIN_ERROR,
  ISENSE_UNKNOWN_FACTOR,
  ISENSE_IO_ERROR,
  ISENSE_ALREADY_EXISTS,
  ISENSE_CORRUPT_SESSION,
  ISENSE_VERSION_MISMATCH,
  ISENSE_USAGE,
  ISENSE_NETWORK_ERROR,
  ISENSE_INVALID_ARGUMENT = 100, /* null handle or pointer */
  ISENSE_INTERNAL = 101
} isense_status;

typedef enum isense_pacing { ISENSE_PACING_REALTIME = 0, ISENSE_PACING_MAX = 1 } isense_pacing;
typedef enum isense_posthoc { ISENSE_POSTHOC_FISHER_LSD = 0, ISENSE_POSTHOC_TUKEY_HSD = 1 } isense_posthoc;

typedef struct isense_config isense_config;
typedef struct isense_session isense_session;
typedef struct isense_host isense_host;

typedef struct isense_analysis_options {
  double cutoff_hz;       /* lowpass cutoff, default 6 */
  double rest_start_s;    /* offset window after a rest/trial start, default 0.5 */
  double rest_end_s;      /* default 2.0 */
  double steady_window_s; /* minimum-CoV window, default 2.0 */
  isense_posthoc posthoc; /* default Fisher's LSD */
  double alpha;           /* default 0.05 */
} isense_analysis_options;

/* Library */
ISENSE_API const char* isense_version(void);
ISENSE_API const char* isense_status_name(isense_status status);
/* Message of the most recent failure on the calling thread ("" if none). */
ISENSE_API const char* isense_last_error(void);
/* "trace", "debug", "info", "warn", "error", "off". */
ISENSE_API isense_status isense_set_log_level(const char* level);
/* Strings handed out through char** parameters are released with this. */
ISENSE_API void isense_free_string(char* s);
ISENSE_API uint16_t isense_crc16(const uint8_t* bytes, size_t len);
/* JSON array of scenario names. */
ISENSE_API isense_status isense_scenario_names(char** out_json);

/* Key/value configuration (scenario and pad parameters). */
ISENSE_API isense_status isense_config_create(isense_config** out);
ISENSE_API void isense_config_destroy(isense_config* cfg);
ISENSE_API isense_status isense_config_load(isense_config* cfg, const char* path);
ISENSE_API isense_status isense_config_set(isense_config* cfg, const char* key, const char* value);

/* Sessions */
ISENSE_API isense_status isense_simulate(const char* scenario, const isense_config* cfg, uint64_t seed,
                                         isense_session** out);
ISENSE_API isense_status isense_session_read(const char* dir, isense_session** out);
ISENSE_API isense_status isense_session_write(const isense_session* s, const char* dir, int overwrite);
ISENSE_API void isense_session_destroy(isense_session* s);
/* Manifest, sample count, duration, event count and stream health as JSON. */
ISENSE_API isense_status isense_session_info(const isense_session* s, char** out_json);

/* Analyses. `analysis` is one of calibrate, relax, condition, cycles, steady.
   cycles and steady write derived artifacts into the session directory.
   `opts` may be NULL for defaults. */
ISENSE_API isense_analysis_options isense_analysis_options_default(void);
ISENSE_API isense_status isense_analyze(const char* session_dir, const char* analysis,
                                        const isense_analysis_options* opts, char** out_json);
/* Two-way ANOVA with post-hoc tests on a CSV table (angle_deg, mass_kg, rep,
   pressure_pa). With as_text != 0 the result is a printable table. */
ISENSE_API isense_status isense_anova_table(const char* table_csv, const isense_analysis_options* opts, int as_text,
                                            char** out);
/* Same, on the steady-state table of a stepwise session. */
ISENSE_API isense_status isense_anova_session(const char* session_dir, const isense_analysis_options* opts,
                                              int as_text, char** out);
/* Writes derived/report.md and derived/report.json; returns the JSON. */
ISENSE_API isense_status isense_report(const char* session_dir, const isense_analysis_options* opts, char** out_json);

/* Telemetry */
typedef void (*isense_listen_cb)(uint16_t port, void* user);
/* Serves the session's samples and events to the first client on `listen`. */
ISENSE_API isense_status isense_device_emulate(const isense_session* s, const char* listen, isense_pacing pacing,
                                               isense_listen_cb on_listen, void* user, char** out_report_json);
ISENSE_API isense_status isense_record(const char* connect, const char* out_dir, int overwrite,
                                       double connect_timeout_s, char** out_report_json);

/* Dashboard host. Options JSON keys: source (host:port or session dir),
   ui (host:port), ingest (host:port), ui_dir, out_dir, overwrite, loop,
   pacing ("realtime" | "max"), queue. */
ISENSE_API isense_status isense_host_create(const char* options_json, isense_host** out);
ISENSE_API isense_status isense_host_start(isense_host* h);
ISENSE_API isense_status isense_host_wait(isense_host* h);
ISENSE_API isense_status isense_host_stop(isense_host* h);
ISENSE_API uint16_t isense_host_ui_port(const isense_host* h);
ISENSE_API void isense_host_destroy(isense_host* h);

#ifdef __cplusplus
}
#endif

#endif
