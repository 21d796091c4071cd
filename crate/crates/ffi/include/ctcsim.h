#ifndef CTCSIM_H
#define CTCSIM_H

#include <stdint.h>

typedef enum CtcsimStatus {
  CTCSIM_STATUS_OK = 0,
  CTCSIM_STATUS_NULL_ARGUMENT = 1,
  CTCSIM_STATUS_INVALID_ARGUMENT = 2,
  CTCSIM_STATUS_IO = 3,
  CTCSIM_STATUS_VALIDATION = 4,
  /**
   * The requested benefit cannot be reached at any income.
   */
  CTCSIM_STATUS_UNREACHABLE = 5,
  CTCSIM_STATUS_INTERNAL = 99,
} CtcsimStatus;

/**
 * Values accepted by `group` arguments.
 */
typedef enum CtcsimGroup {
  CTCSIM_GROUP_MARRIED = 0,
  CTCSIM_GROUP_SINGLE_FATHER = 1,
  CTCSIM_GROUP_SINGLE_MOTHER = 2,
} CtcsimGroup;

/**
 * Values accepted by `scenario` arguments.
 */
typedef enum CtcsimScenario {
  CTCSIM_SCENARIO_S1 = 1,
  CTCSIM_SCENARIO_S2 = 2,
} CtcsimScenario;

/**
 * Values accepted by `liability` arguments.
 */
typedef enum CtcsimLiability {
  CTCSIM_LIABILITY_EXACT = 0,
  CTCSIM_LIABILITY_TABLE = 1,
} CtcsimLiability;

/**
 * Parameters plus population data.
 */
typedef struct CtcsimEngine CtcsimEngine;

/**
 * Parameter set for every available year.
 */
typedef struct CtcsimParams CtcsimParams;

/**
 * Income thresholds in cents.
 */
typedef struct CtcsimThresholds {
  int64_t refund_floor;
  int64_t full_actc;
  int64_t full_ctc;
  int64_t full_combined;
  int64_t phaseout_start;
  int64_t total_phaseout;
} CtcsimThresholds;

/**
 * Benefit at one income, rounded to cents.
 */
typedef struct CtcsimBenefit {
  int64_t tax;
  int64_t credit;
  int64_t refund;
  int64_t total;
} CtcsimBenefit;

/**
 * Parents per relief category, lowest income category first.
 */
typedef struct CtcsimEstimate {
  uint64_t counts[6];
  double proportions[6];
  uint64_t total;
} CtcsimEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ctcsim_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *ctcsim_version(void);

/**
 * Loads a JSON parameter file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum CtcsimStatus ctcsim_params_load(const char *path, struct CtcsimParams **out);

/**
 * Parses parameters from a JSON string.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum CtcsimStatus ctcsim_params_from_json(const char *json, struct CtcsimParams **out);

/**
 * # Safety
 * `params` must be null or a handle from this library not yet freed.
 */
void ctcsim_params_free(struct CtcsimParams *params);

/**
 * Income thresholds for one household.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum CtcsimStatus ctcsim_thresholds(const struct CtcsimParams *params,
                                    int32_t year,
                                    uint32_t group,
                                    uint32_t children_hundredths,
                                    uint32_t liability,
                                    struct CtcsimThresholds *out);

/**
 * Tax, credit and refund at `income_cents`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum CtcsimStatus ctcsim_benefit(const struct CtcsimParams *params,
                                 int32_t year,
                                 uint32_t group,
                                 uint32_t children_hundredths,
                                 uint32_t liability,
                                 int64_t income_cents,
                                 struct CtcsimBenefit *out);

/**
 * Lowest income, in cents, whose total benefit reaches `target_cents`.
 *
 * # Safety
 * `params` must be a live handle and `out_income_cents` writable.
 */
enum CtcsimStatus ctcsim_invert_benefit(const struct CtcsimParams *params,
                                        int32_t year,
                                        uint32_t group,
                                        uint32_t children_hundredths,
                                        uint32_t liability,
                                        int64_t target_cents,
                                        int64_t *out_income_cents);

/**
 * Loads parameters and population data. `children_path` may be null, in
 * which case only one-child scenarios can be classified.
 *
 * # Safety
 * Paths must be NUL-terminated strings (`children_path` may be null) and
 * `out` writable.
 */
enum CtcsimStatus ctcsim_engine_load(const char *params_path,
                                     const char *population_path,
                                     const char *children_path,
                                     uint32_t liability,
                                     struct CtcsimEngine **out);

/**
 * # Safety
 * `engine` must be null or a handle from this library not yet freed.
 */
void ctcsim_engine_free(struct CtcsimEngine *engine);

/**
 * Relief category counts for one year and group under its own rules.
 *
 * # Safety
 * `engine` must be a live handle and `out` writable.
 */
enum CtcsimStatus ctcsim_classify(const struct CtcsimEngine *engine,
                                  int32_t year,
                                  uint32_t group,
                                  uint32_t scenario,
                                  struct CtcsimEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTCSIM_H */
