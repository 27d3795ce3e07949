#ifndef WGSTOKES_H
#define WGSTOKES_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum WgsStatus {
  WGS_STATUS_OK = 0,
  WGS_STATUS_NULL_POINTER = 1,
  WGS_STATUS_INVALID_ARGUMENT = 2,
  WGS_STATUS_MESH_ERROR = 3,
  WGS_STATUS_PROBLEM_ERROR = 4,
  WGS_STATUS_CONFIG_ERROR = 5,
  WGS_STATUS_LINALG_ERROR = 6,
  WGS_STATUS_NOT_CONVERGED = 7,
  WGS_STATUS_IO_ERROR = 8,
  WGS_STATUS_PANIC = 9,
} WgsStatus;

typedef enum WgsMethod {
  WGS_METHOD_MINRES = 0,
  WGS_METHOD_GMRES = 1,
} WgsMethod;

typedef enum WgsPreconditioner {
  /**
   * Method default: block diagonal for MINRES, block lower triangular for GMRES.
   */
  WGS_PRECONDITIONER_DEFAULT = 0,
  WGS_PRECONDITIONER_BLOCK_DIAG = 1,
  WGS_PRECONDITIONER_BLOCK_LOWER_TRI = 2,
  WGS_PRECONDITIONER_NONE = 3,
} WgsPreconditioner;

/**
 * Opaque simplicial mesh.
 */
typedef struct WgsMesh WgsMesh;

/**
 * Opaque discrete solution together with its solver report and errors.
 */
typedef struct WgsSolution WgsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *wgs_last_error_message(void);

/**
 * Structured mesh of the unit square (`dim = 2`) or cube (`dim = 3`) with
 * `n` subdivisions per side.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum WgsStatus wgs_mesh_new_structured(uint32_t dim, uintptr_t n, struct WgsMesh **out);

/**
 * Read a mesh file (native text format, or Gmsh `.msh`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WgsStatus wgs_mesh_load(const char *path, struct WgsMesh **out);

/**
 * # Safety
 * `mesh` must be NULL or a handle from this library not yet freed.
 */
void wgs_mesh_free(struct WgsMesh *mesh);

/**
 * # Safety
 * `mesh` must be NULL or a live handle.
 */
uintptr_t wgs_mesh_num_elements(const struct WgsMesh *mesh);

/**
 * # Safety
 * `mesh` must be NULL or a live handle.
 */
uint32_t wgs_mesh_dim(const struct WgsMesh *mesh);

/**
 * Solve the built-in manufactured problem of the mesh dimension with
 * viscosity `mu`. `tol <= 0` selects the default tolerance. A solve that
 * stops without converging still returns its handle in `out`, together
 * with `WGS_STATUS_NOT_CONVERGED`.
 *
 * # Safety
 * `mesh` must be a live handle and `out` a valid pointer.
 */
enum WgsStatus wgs_solve(const struct WgsMesh *mesh,
                         double mu,
                         enum WgsMethod method,
                         enum WgsPreconditioner preconditioner,
                         double tol,
                         struct WgsSolution **out);

/**
 * # Safety
 * `solution` must be NULL or a handle from this library not yet freed.
 */
void wgs_solution_free(struct WgsSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a live handle.
 */
uintptr_t wgs_solution_iterations(const struct WgsSolution *solution);

/**
 * # Safety
 * `solution` must be NULL or a live handle.
 */
bool wgs_solution_converged(const struct WgsSolution *solution);

/**
 * Final true relative residual, NaN for a NULL handle.
 *
 * # Safety
 * `solution` must be NULL or a live handle.
 */
double wgs_solution_final_relres(const struct WgsSolution *solution);

/**
 * Velocity L2 error, superconvergence error at barycenters and pressure L2
 * error against the exact solution. Any output pointer may be NULL.
 *
 * # Safety
 * `solution` must be a live handle; non-NULL outputs must be writable.
 */
enum WgsStatus wgs_solution_errors(const struct WgsSolution *solution,
                                   double *l2_velocity,
                                   double *superconv,
                                   double *pressure);

/**
 * Copy the elementwise pressure (zero mean) into `buf`. Returns the number
 * of elements; nothing is written when `len` is smaller than that.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable doubles.
 */
uintptr_t wgs_solution_pressure(const struct WgsSolution *solution, double *buf, uintptr_t len);

/**
 * Copy the interior velocity values, `dim` components per element in
 * element order, into `buf`. Returns the required length.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable doubles.
 */
uintptr_t wgs_solution_velocity(const struct WgsSolution *solution, double *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WGSTOKES_H */
