/* C ABI for the toral library.
 *
 * Matrices cross the boundary in the text format: rows separated by ';',
 * entries by ',' (e.g. "2,1;1,1"). Every fallible call returns a
 * ToralStatus; results come back through out-pointers. Strings returned by
 * the library are freed with toral_string_free, census handles with
 * toral_census_free. toral_last_error() returns a thread-local message for
 * the most recent failure, valid until the next failing call on the thread.
 *
 * Kept in sync with src/lib.rs (see cbindgen.toml); a test cross-checks the
 * exported symbol list against this header.
 */

#ifndef TORAL_H
#define TORAL_H

#include <stdint.h>
#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ToralStatus {
  TORAL_STATUS_OK = 0,
  TORAL_STATUS_NULL_POINTER = 1,
  TORAL_STATUS_INVALID_UTF8 = 2,
  TORAL_STATUS_PARSE_ERROR = 3,
  TORAL_STATUS_DOMAIN_ERROR = 4,
  TORAL_STATUS_CAP_EXCEEDED = 5,
  TORAL_STATUS_OVERFLOW = 6,
  TORAL_STATUS_UNREPRESENTABLE = 7,
  TORAL_STATUS_INTERNAL_ERROR = 8,
} ToralStatus;

/* Opaque census handle. */
typedef struct ToralCensus ToralCensus;

/* Message for the most recent error on this thread. */
const char *toral_last_error(void);

/* Frees a string returned by this library. */
void toral_string_free(char *s);

/* ord(M, n); 0 means M is not invertible mod n. */
ToralStatus toral_matrix_order(const char *matrix, uint64_t modulus,
                               uint64_t *out_order);

/* Orbit census of M on (Z/nZ)^d. */
ToralStatus toral_census_compute(const char *matrix, uint64_t modulus,
                                 ToralCensus **out_census);

void toral_census_free(ToralCensus *census);

/* Number of distinct cycle lengths. */
size_t toral_census_cycle_count(const ToralCensus *census);

/* The idx-th (length, count) pair, sorted by length. */
ToralStatus toral_census_cycle(const ToralCensus *census, size_t idx,
                               uint64_t *out_length, uint64_t *out_count);

/* Number of eventually-periodic (pretail) points. */
ToralStatus toral_census_pretail_points(const ToralCensus *census,
                                        uint64_t *out);

/* The cycle polynomial Z_n(t), e.g. "(1-t)(1-t^2)^2(1-t^10)^2". */
char *toral_census_zeta(const ToralCensus *census);

/* Reversibility of a 2x2 matrix mod n: 1 reversible, 0 not, -1 undecided. */
ToralStatus toral_reversible(const char *matrix, uint64_t modulus,
                             uint64_t max_search, int32_t *out_verdict);

/* Involutory reversor of an SL(2,Z) matrix mod n, in matrix text format. */
ToralStatus toral_build_reversor(const char *matrix, uint64_t modulus,
                                 uint64_t max_search, char **out_reversor);

/* GL(2, F_p) classification: class tag 1..4 (I..IV) and reversibility. */
ToralStatus toral_classify_gl2(const char *matrix, uint64_t prime,
                               int32_t *out_class, int32_t *out_reversible);

/* Level profile v_0..v_height of the pretail tree at 0. */
ToralStatus toral_pretail_profile(const char *matrix, uint64_t modulus,
                                  uint64_t max_points, uint64_t *out_levels,
                                  size_t capacity, size_t *out_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TORAL_H */
