/* C interface to the HDG solver library.
 *
 * Every function returns an hdg_status; on failure a description is available
 * from hdg_last_error() (per thread, valid until the next call on that
 * thread). Strings returned through char** are owned by the caller and must
 * be released with hdg_free().
 */
#ifndef HDG_H
#define HDG_H

#include <stddef.h>

#if defined(_WIN32)
#define HDG_API __declspec(dllexport)
#else
#define HDG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdg_status {
  HDG_OK = 0,
  HDG_ERR_CONFIG = 1,
  HDG_ERR_PARSE = 2,
  HDG_ERR_TOPOLOGY = 3,
  HDG_ERR_NUMERICAL = 4,
  HDG_ERR_CONTRACT = 5,
  HDG_ERR_INVALID_ARGUMENT = 6,
  HDG_ERR_CHECK_FAILED = 7,
  HDG_ERR_INTERNAL = 8
} hdg_status;

typedef struct hdg_study hdg_study;
typedef struct hdg_mesh hdg_mesh;

/* One refinement level. Unavailable values (orders on the first row,
 * projection errors when tau varies on an element) are NaN. */
typedef struct hdg_row {
  double inv_h;
  double h;
  double err_q;
  double ord_q;
  double err_u;
  double ord_u;
  double err_piwu;
  double ord_piwu;
  double err_pivq;
  double energy_resid;
  double flux_resid;
  double transmission_resid;
} hdg_row;

HDG_API const char* hdg_version(void);
HDG_API const char* hdg_last_error(void);
HDG_API const char* hdg_status_name(hdg_status status);
HDG_API void hdg_free(char* text);

/* Study configuration and results. Keys are the long command line option
 * names: method, k, w-degree, stab, tau, tau-rule, mesh, refine, solution,
 * labeling, format, out, json, checks, jobs. */
HDG_API hdg_status hdg_study_create(hdg_study** out);
HDG_API void hdg_study_destroy(hdg_study* study);
HDG_API hdg_status hdg_study_set(hdg_study* study, const char* key, const char* value);
HDG_API hdg_status hdg_study_get(const hdg_study* study, const char* key, char** value);
/* key = value lines, '#' comments. */
HDG_API hdg_status hdg_study_load_config(hdg_study* study, const char* text);

/* Runs the refinement sweep. Returns HDG_ERR_CHECK_FAILED when an enabled
 * check failed; the report is still available in that case. */
HDG_API hdg_status hdg_study_run(hdg_study* study);
HDG_API size_t hdg_study_row_count(const hdg_study* study);
HDG_API hdg_status hdg_study_row(const hdg_study* study, size_t index, hdg_row* row);
/* format: "csv", "md" or "json". */
HDG_API hdg_status hdg_study_emit(const hdg_study* study, const char* format, char** text);
/* Newline-separated names of the failed checks of the last run. */
HDG_API hdg_status hdg_study_failed_checks(const hdg_study* study, char** text);

/* Runs the verification suite for the configured method. `report` receives
 * a JSON summary when format is "json", one line per check otherwise.
 * Returns HDG_ERR_CHECK_FAILED when a check failed. */
HDG_API hdg_status hdg_study_verify(const hdg_study* study, const char* format, char** report);

/* Meshes. pattern: "right-split" or "criss-cross". */
HDG_API hdg_status hdg_mesh_structured(int n, const char* pattern, hdg_mesh** out);
HDG_API hdg_status hdg_mesh_import(const char* node_text, const char* ele_text, hdg_mesh** out);
HDG_API void hdg_mesh_destroy(hdg_mesh* mesh);
HDG_API hdg_status hdg_mesh_counts(const hdg_mesh* mesh, int* vertices, int* triangles, int* edges);
HDG_API hdg_status hdg_mesh_quality(const hdg_mesh* mesh, double* h, double* shape_ratio);
/* Discrete inf-sup estimate of the jump operator for trace degree k. */
HDG_API hdg_status hdg_mesh_infsup(const hdg_mesh* mesh, int k, double* value);

#ifdef __cplusplus
}
#endif

#endif /* HDG_H */
