#ifndef TSPP_H
#define TSPP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by fallible calls.
 */
typedef enum TsppStatus {
  /**
   * Success.
   */
  Ok = 0,
  /**
   * A required pointer argument was null.
   */
  NullArgument = 1,
  /**
   * Arguments failed validation; see `tspp_last_error`.
   */
  InvalidArgument = 2,
  /**
   * The operation itself failed; see `tspp_last_error`.
   */
  RuntimeError = 3,
} TsppStatus;

/**
 * Opaque reward simulator.
 */
typedef struct TsppModel TsppModel;

/**
 * Opaque policy configuration.
 */
typedef struct TsppPolicy TsppPolicy;

/**
 * Opaque deterministic random stream.
 */
typedef struct TsppRng TsppRng;

/**
 * Opaque Beta-posterior state store.
 */
typedef struct TsppStore TsppStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message from the most recent failure on this thread into `buf`
 * (NUL-terminated, truncated to `cap` bytes) and return the full message
 * length in bytes. `buf` may be null to query the length only.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writable bytes.
 */
uintptr_t tspp_last_error(char *buf, uintptr_t cap);

/**
 * Derive a child seed from a master seed and two stream indices. Pure.
 */
uint64_t tspp_derive_seed(uint64_t master, uint64_t replication, uint64_t policy);

/**
 * Create a deterministic random stream. Never fails; free with
 * `tspp_rng_free`.
 */
struct TsppRng *tspp_rng_new(uint64_t seed, uint64_t stream);

/**
 * Destroy a random stream. Null is a no-op.
 *
 * # Safety
 * `rng` must be null or a pointer from `tspp_rng_new` not yet freed.
 */
void tspp_rng_free(struct TsppRng *rng);

/**
 * Create a posterior store for a uniform arm space of `dims` dimensions
 * with `choices` options each, maintaining keys up to `max_order` plus the
 * full-layout key when `track_full` is nonzero.
 *
 * # Safety
 * `out` must be a valid pointer to a store handle slot.
 */
enum TsppStatus tspp_store_new(uintptr_t dims,
                               uint32_t choices,
                               uintptr_t max_order,
                               bool track_full,
                               struct TsppStore **out);

/**
 * Destroy a store. Null is a no-op.
 *
 * # Safety
 * `store` must be null or a pointer from `tspp_store_new` not yet freed.
 */
void tspp_store_free(struct TsppStore *store);

/**
 * Back-propagate one binary reward for the arm given as `len` 1-based
 * choices.
 *
 * # Safety
 * `store` must be a live store handle; `choices` must be valid for `len`
 * reads.
 */
enum TsppStatus tspp_store_update(struct TsppStore *store,
                                  const uint32_t *choices,
                                  uintptr_t len,
                                  uint8_t reward);

/**
 * Number of keys currently tracked by the store.
 *
 * # Safety
 * `store` must be null or a live store handle.
 */
uintptr_t tspp_store_len(const struct TsppStore *store);

/**
 * Parse a policy configuration from its JSON form, e.g.
 * `{"variant":"ppf","order":2,"searches":45}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid slot.
 */
enum TsppStatus tspp_policy_new_json(const char *json, struct TsppPolicy **out);

/**
 * Destroy a policy. Null is a no-op.
 *
 * # Safety
 * `policy` must be null or a pointer from `tspp_policy_new_json` not yet
 * freed.
 */
void tspp_policy_free(struct TsppPolicy *policy);

/**
 * Run the policy once against the store and write the selected arm's
 * 1-based choices into `out_choices` (`len` must equal the store's
 * dimension count).
 *
 * # Safety
 * All handles must be live; `out_choices` must be valid for `len` writes.
 */
enum TsppStatus tspp_select_arm(const struct TsppPolicy *policy,
                                const struct TsppStore *store,
                                struct TsppRng *rng,
                                uint32_t *out_choices,
                                uintptr_t len);

/**
 * Build a reward simulator with random weights drawn from the given seed:
 * interaction order `order`, scaling divisor `scale`, and `order` control
 * parameters in `controls`.
 *
 * # Safety
 * `controls` must be valid for `order` reads; `out` must be a valid slot.
 */
enum TsppStatus tspp_model_new(uintptr_t dims,
                               uint32_t choices,
                               uintptr_t order,
                               double scale,
                               const double *controls,
                               uint64_t seed,
                               struct TsppModel **out);

/**
 * Destroy a model. Null is a no-op.
 *
 * # Safety
 * `model` must be null or a pointer from `tspp_model_new` not yet freed.
 */
void tspp_model_free(struct TsppModel *model);

/**
 * Success probability of the arm under the model.
 *
 * # Safety
 * `model` must be live; `choices` valid for `len` reads; `out` writable.
 */
enum TsppStatus tspp_model_success_prob(const struct TsppModel *model,
                                        const uint32_t *choices,
                                        uintptr_t len,
                                        double *out);

/**
 * Draw one Bernoulli reward for the arm.
 *
 * # Safety
 * `model` and `rng` must be live; `choices` valid for `len` reads; `out`
 * writable.
 */
enum TsppStatus tspp_model_draw_reward(const struct TsppModel *model,
                                       const uint32_t *choices,
                                       uintptr_t len,
                                       struct TsppRng *rng,
                                       uint8_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSPP_H */
