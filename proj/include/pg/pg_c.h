#ifndef PG_C_H
#define PG_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pg_bundle pg_bundle;
typedef struct pg_scenario pg_scenario;

typedef enum pg_status {
  PG_OK = 0,
  PG_ERR_VALIDATION = 2,
  PG_ERR_NUMERICAL = 3,
  PG_ERR_NULL_ARGUMENT = 4,
  PG_ERR_INTERNAL = 5
} pg_status;

/* Version string of the library; static storage. */
const char* pg_version(void);

/* Message of the last failed call on this thread, or "" when none. */
const char* pg_last_error(void);
/* Error kind name of the last failed call on this thread ("" when none). */
const char* pg_last_error_kind(void);

/* Bundle from its JSON document. On failure *out is set to NULL. */
pg_status pg_bundle_from_json(const char* json_text, pg_bundle** out);
void pg_bundle_free(pg_bundle* bundle);
int pg_bundle_rank(const pg_bundle* bundle);

/* Degree and slope of the bundle, or of the sub given by one prefix length per
   zero-end block in canonical order (prefix == NULL for the whole bundle). */
pg_status pg_bundle_degree(const pg_bundle* bundle, const int* prefix, size_t prefix_len, double* out);
pg_status pg_bundle_slope(const pg_bundle* bundle, const int* prefix, size_t prefix_len, double* out);

/* Stability verdict as a JSON string; release it with pg_string_free. */
pg_status pg_bundle_stability_json(const pg_bundle* bundle, char** out);
void pg_string_free(char* s);

/* Scenario from a config file; runs one command ("flow", "analyze", ...).
   The summary JSON is returned through *summary (release with pg_string_free).
   A run that writes its files but misses its target returns PG_ERR_NUMERICAL
   with the summary still set. */
pg_status pg_scenario_load(const char* config_path, pg_scenario** out);
pg_status pg_scenario_run(pg_scenario* scenario, const char* command, const char* out_dir, unsigned seed,
                          char** summary);
void pg_scenario_free(pg_scenario* scenario);

#ifdef __cplusplus
}
#endif

#endif
