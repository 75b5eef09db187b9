#ifndef MARGREG_MARGREG_H
#define MARGREG_MARGREG_H

/* C interface to the margreg library. Every function returns an mrg_status;
 * on failure mrg_last_error() describes the problem (per thread). Strings and
 * arrays handed out by the library are released with mrg_string_free /
 * mrg_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(MARGREG_BUILDING_LIBRARY)
#define MRG_API __attribute__((visibility("default")))
#else
#define MRG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrg_status {
  MRG_OK = 0,
  MRG_ERR_INVALID_ARGUMENT,
  MRG_ERR_PARSE,
  MRG_ERR_DIMENSION_MISMATCH,
  MRG_ERR_NOT_STANDARDIZED,
  MRG_ERR_ZERO_COLUMN,
  MRG_ERR_EMPTY_SUPPORT,
  MRG_ERR_FULL_SUPPORT,
  MRG_ERR_NOT_SYMMETRIC,
  MRG_ERR_NEAR_SINGULAR,
  MRG_ERR_INDEX_OUT_OF_RANGE,
  MRG_ERR_K_OUT_OF_RANGE,
  MRG_ERR_NOT_UNIT_DIAGONAL,
  MRG_ERR_DIAGONAL_MATRIX,
  MRG_ERR_NO_VALID_ROW,
  MRG_ERR_OVERFLOW,
  MRG_ERR_ALL_OVERFLOW,
  MRG_ERR_DEGENERATE_REGRESSION,
  MRG_ERR_CONFIG,
  MRG_ERR_IO,
  MRG_ERR_INTERNAL
} mrg_status;

MRG_API const char* mrg_status_string(mrg_status status);

/* 0 ok, 2 validation failure, 3 numerical failure, 1 internal error. */
MRG_API int mrg_status_exit_code(mrg_status status);

/* Message for the last failed call on this thread; "" if none. */
MRG_API const char* mrg_last_error(void);

MRG_API void mrg_string_free(char* s);
MRG_API void mrg_free(void* p);

/* Design matrices. With standardize != 0 the columns are scaled to unit
 * norm; otherwise the standardized flag is set only if they already are. */
typedef struct mrg_design mrg_design;

MRG_API mrg_status mrg_design_create(const double* row_major, size_t n, size_t p,
                                     int standardize, mrg_design** out);
MRG_API mrg_status mrg_design_load_csv(const char* path, int standardize, mrg_design** out);
MRG_API void mrg_design_destroy(mrg_design* design);
MRG_API mrg_status mrg_design_shape(const mrg_design* design, size_t* n, size_t* p);
MRG_API int mrg_design_standardized(const mrg_design* design);

/* Reads a single-row or single-column CSV. *out is released with mrg_free. */
MRG_API mrg_status mrg_vector_load_csv(const char* path, double** out, size_t* len);

typedef struct mrg_condition_params {
  double lambda0;
  double eta;
  double rho_min;
  double lambda;
  double sigma;
} mrg_condition_params;

MRG_API void mrg_condition_params_default(mrg_condition_params* params);

/* Condition report as JSON. beta_s holds the coefficients on the support in
 * increasing index order; NULL means all ones. */
MRG_API mrg_status mrg_check_conditions(const mrg_design* design, const size_t* support,
                                        size_t s, const double* beta_s,
                                        const mrg_condition_params* params, char** json_out);

typedef enum mrg_method { MRG_METHOD_MR = 0, MRG_METHOD_MR_AUTO, MRG_METHOD_LASSO } mrg_method;

typedef struct mrg_select_params {
  mrg_method method;
  int has_tuning;    /* required for MR (threshold t) and LASSO (lambda) */
  double tuning;
  double sigma;      /* required for MR_AUTO */
  int include_alpha; /* MR / MR_AUTO: emit the full X^T Y vector */
} mrg_select_params;

MRG_API mrg_status mrg_select(const mrg_design* design, const double* y, size_t n,
                              const mrg_select_params* params, char** json_out);

/* Phase-diagram sweep from a JSON config; CSV out. threads = 0 uses all
 * hardware threads. Output does not depend on the thread count. */
MRG_API mrg_status mrg_phase_sweep(const char* config_json, unsigned threads, char** csv_out);

typedef struct mrg_sect5_overrides {
  int has_reps;
  size_t reps;
  int has_seed;
  uint64_t seed;
  int has_sigma;
  double sigma;
  int refit;   /* nonzero forces refit on */
  int holdout; /* nonzero forces holdout on */
} mrg_sect5_overrides;

/* Path benchmark; config_json may be NULL for the default grid. */
MRG_API mrg_status mrg_sect5(const char* config_json, const mrg_sect5_overrides* overrides,
                             unsigned threads, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif
