#ifndef FIBERWALK_H
#define FIBERWALK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. `1`, `2` and `3` match the exit codes of the command-line tool.
typedef enum FwStatus {
  FW_STATUS_OK = 0,
  FW_STATUS_INVALID_ARGUMENT = 1,
  FW_STATUS_INFEASIBLE = 2,
  FW_STATUS_CERTIFICATION_FAILED = 3,
  FW_STATUS_NULL_POINTER = 4,
  FW_STATUS_INVALID_UTF8 = 5,
  FW_STATUS_BUFFER_TOO_SMALL = 6,
  FW_STATUS_PANIC = 7,
} FwStatus;

typedef enum FwStrategy {
  FW_STRATEGY_COMPLETE = 0,
  FW_STRATEGY_MOVES = 1,
  FW_STRATEGY_MOVES_SQUARED = 2,
} FwStrategy;

// A validated model instance.
typedef struct FwInstance FwInstance;

// A built sampler graph.
typedef struct FwSampler FwSampler;

// Sizes and certified second eigenvalues of a built sampler.
typedef struct FwSamplerInfo {
  uint64_t m;
  uint64_t seed;
  size_t dim;
  size_t n_s;
  size_t n_h;
  size_t d_h;
  size_t n_e;
  size_t num_vertices;
  size_t degree;
  double lambda_h;
  double lambda_e;
  double lambda_target;
  double lambda_bound;
} FwSamplerInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fw_version(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next library call on this thread.
const char *fw_last_error_message(void);

void fw_string_free(char *s);

enum FwStatus fw_instance_from_json(const char *json, struct FwInstance **out_instance);

enum FwStatus fw_instance_from_file(const char *path, struct FwInstance **out_instance);

enum FwStatus fw_instance_dim(const struct FwInstance *instance, size_t *out_dim);

void fw_instance_free(struct FwInstance *instance);

// Builds `G_m` for the instance. `moves` holds `num_moves` row-major moves
// of length `dim` and is ignored for `FW_STRATEGY_COMPLETE`. A
// `lambda_target` that is not positive selects the default target.
enum FwStatus fw_sampler_build(const struct FwInstance *instance,
                               enum FwStrategy strategy,
                               const int64_t *moves,
                               size_t num_moves,
                               uint64_t m,
                               uint64_t seed,
                               double lambda_target,
                               struct FwSampler **out_sampler);

// Loads a sampler bundle directory written by [`fw_sampler_save`] or the
// command-line `build -o`.
enum FwStatus fw_sampler_load(const char *dir, struct FwSampler **out_sampler);

enum FwStatus fw_sampler_save(const struct FwSampler *sampler, const char *dir);

void fw_sampler_free(struct FwSampler *sampler);

enum FwStatus fw_sampler_info(const struct FwSampler *sampler, struct FwSamplerInfo *out_info);

// Least `T` with `(lambda_E + lambda_H)^T <= 1e-4`.
enum FwStatus fw_sampler_auto_steps(const struct FwSampler *sampler, uint64_t *out_steps);

// Draws `count` points into `out_coords` as `count * dim` row-major doubles.
// `out_len` is the capacity of `out_coords` in doubles.
enum FwStatus fw_sampler_sample(const struct FwSampler *sampler,
                                size_t count,
                                uint64_t steps,
                                uint64_t seed,
                                size_t max_blocks,
                                bool exact_oracle,
                                double *out_coords,
                                size_t out_len);

// Draws `count` points as CSV text with exact rational coordinates.
enum FwStatus fw_sampler_sample_csv(const struct FwSampler *sampler,
                                    size_t count,
                                    uint64_t steps,
                                    uint64_t seed,
                                    size_t max_blocks,
                                    bool exact_oracle,
                                    char **out_csv);

// Point of a vertex of `G_m` as comma-separated exact rationals.
enum FwStatus fw_sampler_decode(const struct FwSampler *sampler, size_t vertex, char **out_point);

enum FwStatus fw_sampler_is_relevant(const struct FwSampler *sampler,
                                     size_t vertex,
                                     bool *out_relevant);

// Exact fraction of irrelevant vertices as `p/q`.
enum FwStatus fw_sampler_irrelevant_fraction(const struct FwSampler *sampler, char **out_fraction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBERWALK_H */
