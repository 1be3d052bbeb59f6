#ifndef CURVEDSEQ_H
#define CURVEDSEQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  CSQ_STATUS_OK = 0,
  CSQ_STATUS_NULL_POINTER = 1,
  CSQ_STATUS_DOMAIN = 2,
  CSQ_STATUS_CONFIG = 3,
  CSQ_STATUS_QUADRATURE = 4,
  CSQ_STATUS_SINGULAR = 5,
  CSQ_STATUS_DEGENERATE = 6,
  CSQ_STATUS_UNSUPPORTED = 7,
  CSQ_STATUS_FINITE_DIFFERENCE = 8,
  CSQ_STATUS_IO = 9,
  CSQ_STATUS_PANIC = 10,
} CsqStatus;

typedef enum {
  CSQ_MODEL_VMF = 0,
  CSQ_MODEL_HYPERBOLOID = 1,
} CsqModel;

typedef enum {
  CSQ_TEST_MLT = 0,
  CSQ_TEST_WALD = 1,
  CSQ_TEST_LRT = 2,
  CSQ_TEST_EST = 3,
  /**
   * Uses the `k1`, `k2` arguments.
   */
  CSQ_TEST_DESIGNED = 4,
} CsqTest;

typedef struct CsqFamily CsqFamily;

typedef struct CsqSequentialPlan CsqSequentialPlan;

typedef struct CsqStream CsqStream;

/**
 * Power-loss coefficients at one `(m, alpha, s)`.
 */
typedef struct {
  double xi0;
  double xi1;
  double xi2;
  double k1;
  double k2;
} CsqCoefficients;

/**
 * Outcome of a single test. `tau` is 0 for fixed-sample tests.
 */
typedef struct {
  double statistic;
  bool reject;
  uint64_t tau;
  bool truncated;
} CsqOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or an empty string. The
 * pointer stays valid until the next call into this library on the thread.
 */
const char *csq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *csq_version(void);

CsqStatus csq_family_new(CsqModel model, size_t m, double r, CsqFamily **out);

void csq_family_free(CsqFamily *fam);

/**
 * Manifold dimension `m`, or 0 for a null handle.
 */
size_t csq_family_dim(const CsqFamily *fam);

/**
 * Ambient dimension `m + 1`, or 0 for a null handle.
 */
size_t csq_family_ambient_dim(const CsqFamily *fam);

/**
 * Diagonal of the Fisher metric at `u` (length `m`) into `out_g` (length `m`).
 */
CsqStatus csq_family_metric(const CsqFamily *fam, const double *u, double *out_g);

/**
 * Natural and expectation parameters at `u`, each of length `m + 1`.
 */
CsqStatus csq_family_embed(const CsqFamily *fam,
                           const double *u,
                           double *out_theta,
                           double *out_eta);

CsqStatus csq_coefficients(uint32_t m, double alpha, double s, CsqCoefficients *out);

/**
 * Power-loss components of a test with proportions `(k1, k2)`.
 */
CsqStatus csq_delta_p(uint32_t m,
                      double alpha,
                      double s,
                      double k1,
                      double k2,
                      double *out_dp1,
                      double *out_dp2);

/**
 * Independent random stream `index` of `seed`. Never fails.
 */
CsqStream *csq_stream_new(uint64_t seed, uint64_t index);

void csq_stream_free(CsqStream *stream);

/**
 * Draws `count` observations at `u` into `out`, row-major `count × (m+1)`.
 */
CsqStatus csq_sample(const CsqFamily *fam,
                     const double *u,
                     size_t count,
                     CsqStream *stream,
                     double *out);

/**
 * Fixed-sample test of `u = u0` from the sum of `count` observations.
 */
CsqStatus csq_nonseq_test(const CsqFamily *fam,
                          CsqTest test,
                          double k1,
                          double k2,
                          double alpha,
                          const double *u0,
                          const double *sum_x,
                          size_t count,
                          CsqOutcome *out);

/**
 * Sequential test of `u = u0` stopping at curvature level `k`.
 */
CsqStatus csq_seq_plan_new(const CsqFamily *fam,
                           CsqTest test,
                           double k1,
                           double k2,
                           double alpha,
                           const double *u0,
                           double k,
                           double epsilon_tilde,
                           CsqSequentialPlan **out);

void csq_seq_plan_free(CsqSequentialPlan *plan);

/**
 * Runs one sequential trial with data drawn at `true_u`.
 */
CsqStatus csq_seq_run(const CsqSequentialPlan *plan,
                      const double *true_u,
                      CsqStream *stream,
                      CsqOutcome *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVEDSEQ_H */
