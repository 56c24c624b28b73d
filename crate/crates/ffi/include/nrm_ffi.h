#ifndef NRM_FFI_H
#define NRM_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NrmStatus {
  NRM_STATUS_OK = 0,
  NRM_STATUS_NULL_POINTER = 1,
  NRM_STATUS_INVALID_UTF8 = 2,
  NRM_STATUS_INVALID_INPUT = 3,
  NRM_STATUS_SPEC_ERROR = 4,
  NRM_STATUS_PARSE_ERROR = 5,
  NRM_STATUS_IO_ERROR = 6,
  NRM_STATUS_PANIC = 7,
} NrmStatus;

/**
 * A trained symbol grounder.
 */
typedef struct NrmGrounder NrmGrounder;

/**
 * A compiled reward machine.
 */
typedef struct NrmMachine NrmMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The
 * pointer stays valid until the next call into the library.
 */
const char *nrm_last_error(void);

/**
 * Compiles an LTLf formula over a comma-separated alphabet.
 *
 * # Safety
 * `formula` and `alphabet` must be NUL-terminated strings; `out` must be
 * a valid pointer.
 */
enum NrmStatus nrm_machine_compile(const char *formula,
                                   const char *alphabet,
                                   struct NrmMachine **out);

/**
 * Reads a machine from its text format.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum NrmStatus nrm_machine_parse(const char *source, struct NrmMachine **out);

/**
 * # Safety
 * `m` must be NULL or a handle from this library not yet freed.
 */
void nrm_machine_free(struct NrmMachine *m);

/**
 * Number of states, or 0 for a NULL handle.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t nrm_machine_num_states(const struct NrmMachine *m);

/**
 * Number of symbols, or 0 for a NULL handle.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t nrm_machine_num_symbols(const struct NrmMachine *m);

/**
 * Runs the machine on `len` symbol indices and writes the reward label
 * emitted after each symbol into `out_labels` (length `len`).
 *
 * # Safety
 * `symbols` and `out_labels` must point to `len` elements (either may be
 * NULL when `len` is 0).
 */
enum NrmStatus nrm_machine_run(const struct NrmMachine *m,
                               const size_t *symbols,
                               size_t len,
                               int64_t *out_labels);

/**
 * Graphviz rendering of the machine.
 *
 * # Safety
 * `out` must be a valid pointer; free the result with `nrm_string_free`.
 */
enum NrmStatus nrm_machine_to_dot(const struct NrmMachine *m, char **out);

/**
 * The machine in its text format.
 *
 * # Safety
 * `out` must be a valid pointer; free the result with `nrm_string_free`.
 */
enum NrmStatus nrm_machine_serialize(const struct NrmMachine *m, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void nrm_string_free(char *s);

/**
 * Counts the unremovable reasoning shortcuts of the machine, identity
 * included. When `images` is not NULL, up to `capacity` shortcuts are
 * written to it row by row, each as `num_symbols` symbol indices.
 *
 * # Safety
 * `out_count` must be valid; `images` must be NULL or point to
 * `capacity * num_symbols` elements.
 */
enum NrmStatus nrm_urs_find(const struct NrmMachine *m,
                            size_t *images,
                            size_t capacity,
                            size_t *out_count);

/**
 * Loads a grounder checkpoint written by `nrm ground`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum NrmStatus nrm_grounder_load(const char *path, struct NrmGrounder **out);

/**
 * # Safety
 * `g` must be NULL or a handle from this library not yet freed.
 */
void nrm_grounder_free(struct NrmGrounder *g);

/**
 * Most likely symbol for each of `n` states of dimension `dim`, stored
 * row-major in `states`.
 *
 * # Safety
 * `states` must point to `n * dim` doubles and `out_symbols` to `n`
 * elements.
 */
enum NrmStatus nrm_grounder_predict(const struct NrmGrounder *g,
                                    const double *states,
                                    size_t n,
                                    size_t dim,
                                    size_t *out_symbols);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NRM_FFI_H */
