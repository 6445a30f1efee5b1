#ifndef STARHEAT_H
#define STARHEAT_H

/* Generated by cbindgen. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum ShStatus {
  SH_STATUS_OK = 0,
  SH_STATUS_NULL_POINTER = 1,
  SH_STATUS_INVALID_ARGUMENT = 2,
  SH_STATUS_DIM_MISMATCH = 3,
  SH_STATUS_DEPENDENT_INPUT = 4,
  SH_STATUS_INVALID_PROJECTION = 5,
  SH_STATUS_INVALID_COUPLING = 6,
  SH_STATUS_TOO_LARGE = 7,
  SH_STATUS_NUMERICAL = 8,
  SH_STATUS_BUFFER_TOO_SMALL = 9,
  SH_STATUS_PANIC = 10,
} ShStatus;

typedef enum ShVariant {
  SH_VARIANT_TRACE_DYNAMIC = 0,
  SH_VARIANT_ROBIN = 1,
  SH_VARIANT_FLUX_DYNAMIC = 2,
} ShVariant;

typedef enum ShFarEnd {
  SH_FAR_END_NEUMANN = 0,
  SH_FAR_END_DIRICHLET = 1,
} ShFarEnd;

/**
 * Opaque coupling-matrix handle.
 */
typedef struct ShCoupling ShCoupling;

/**
 * Opaque projection handle.
 */
typedef struct ShProjection ShProjection;

/**
 * Opaque assembled-system handle.
 */
typedef struct ShSystem ShSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sh_last_error(void);

/**
 * Projection for the planar family (N = 2).
 */
enum ShStatus sh_projection_planar(double xi, struct ShProjection **out);

/**
 * Projection for the spherical family (N = 3).
 */
enum ShStatus sh_projection_spherical(double xi, double phi, struct ShProjection **out);

/**
 * Projection onto the span of `count` vectors of length `dim`, stored
 * consecutively in `re`/`im`.
 */
enum ShStatus sh_projection_from_basis(const double *re,
                                       const double *im,
                                       size_t count,
                                       size_t dim,
                                       struct ShProjection **out);

/**
 * Projection from a full `dim × dim` matrix; rejects non-projections.
 */
enum ShStatus sh_projection_from_matrix(const double *re,
                                        const double *im,
                                        size_t dim,
                                        struct ShProjection **out);

void sh_projection_free(struct ShProjection *p);

/**
 * Dimension N, or 0 for a null handle.
 */
size_t sh_projection_dim(const struct ShProjection *p);

size_t sh_projection_rank(const struct ShProjection *p);

/**
 * Copies the N² entries row-major into `re`/`im` (capacity `len`).
 */
enum ShStatus sh_projection_entries(const struct ShProjection *p,
                                    double *re,
                                    double *im,
                                    size_t len);

enum ShStatus sh_projection_is_positive(const struct ShProjection *p, bool *out);

enum ShStatus sh_projection_is_linf_contractive(const struct ShProjection *p, bool *out);

enum ShStatus sh_projection_is_real_preserving(const struct ShProjection *p, bool *out);

enum ShStatus sh_projection_is_irreducible(const struct ShProjection *p, bool *out);

/**
 * Row sums of |P|, written to `out` (capacity `len`).
 */
enum ShStatus sh_projection_row_sums(const struct ShProjection *p, double *out, size_t len);

/**
 * Coupling matrix from `dim × dim` row-major entries.
 */
enum ShStatus sh_coupling_new(const double *re,
                              const double *im,
                              size_t dim,
                              struct ShCoupling **out);

enum ShStatus sh_coupling_zero(size_t dim, struct ShCoupling **out);

void sh_coupling_free(struct ShCoupling *s);

enum ShStatus sh_coupling_is_accretive(const struct ShCoupling *s, bool *out);

enum ShStatus sh_coupling_generates_positive(const struct ShCoupling *s, bool *out);

enum ShStatus sh_coupling_generates_linf_contractive(const struct ShCoupling *s, bool *out);

/**
 * Assembles the discretized star with `cells` elements per edge.
 * `delta_re`/`delta_im` are used only by the flux variant.
 */
enum ShStatus sh_system_assemble(const struct ShProjection *p,
                                 const struct ShCoupling *s,
                                 double length,
                                 size_t cells,
                                 enum ShVariant variant,
                                 enum ShFarEnd far_end,
                                 double delta_re,
                                 double delta_im,
                                 struct ShSystem **out);

void sh_system_free(struct ShSystem *s);

/**
 * Number of degrees of freedom, or 0 for a null handle.
 */
size_t sh_system_dofs(const struct ShSystem *s);

/**
 * Smallest `count` eigenvalues by real part.
 */
enum ShStatus sh_system_eigenvalues(const struct ShSystem *s, size_t count, double *re, double *im);

/**
 * Constant state `1` in discrete coordinates (length `sh_system_dofs`).
 */
enum ShStatus sh_system_constant_state(const struct ShSystem *s,
                                       double *re,
                                       double *im,
                                       size_t len);

/**
 * Applies the exact propagator at time `t` to a state of length `len`
 * (which must equal `sh_system_dofs`). The eigendecomposition is computed
 * on first use and cached in the handle.
 */
enum ShStatus sh_system_propagate(struct ShSystem *s,
                                  double t,
                                  const double *in_re,
                                  const double *in_im,
                                  size_t len,
                                  double *out_re,
                                  double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STARHEAT_H */
