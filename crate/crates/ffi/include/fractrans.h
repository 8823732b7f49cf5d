#ifndef FRACTRANS_H
#define FRACTRANS_H

#include <stddef.h>
#include <stdint.h>

/*
 Result codes.
 */
typedef enum FtStatus {
  FT_STATUS_OK = 0,
  FT_STATUS_NULL_POINTER = 1,
  FT_STATUS_INVALID_PARAMETER = 2,
  FT_STATUS_DOMAIN = 3,
  FT_STATUS_QUADRATURE = 4,
  FT_STATUS_INTEGRATION = 5,
  FT_STATUS_CONFIGURATION = 6,
  FT_STATUS_FACTORIZATION = 7,
  FT_STATUS_NOT_APPLICABLE = 8,
  FT_STATUS_INSUFFICIENT_DATA = 9,
  FT_STATUS_IO = 10,
  FT_STATUS_BUFFER_TOO_SMALL = 11,
  FT_STATUS_PANIC = 12,
} FtStatus;

/*
 SDE coefficients.
 */
typedef struct FtCoeffs FtCoeffs;

/*
 A driver path on a time grid.
 */
typedef struct FtDriver FtDriver;

/*
 Approximation parameters.
 */
typedef struct FtParams FtParams;

/*
 A solution path (Y and optionally X).
 */
typedef struct FtSolution FtSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call into this library from the same thread.
 */
const char *ft_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ft_version(void);

/*
 Validated approximation parameters.

 # Safety
 `out` must be a valid pointer to a handle slot.
 */
enum FtStatus ft_params_new(double hurst,
                            double beta,
                            double delta,
                            double a,
                            uint64_t n,
                            double horizon,
                            struct FtParams **out);

/*
 # Safety
 `p` must be NULL or a handle from [`ft_params_new`], not yet freed.
 */
void ft_params_free(struct FtParams *p);

/*
 Transport approximation `B^n` on `grid_points + 1` uniform points of
 `[0, T]`, drawn from stream `stream` of `master_seed`.

 # Safety
 `params` must be a live handle and `out` a valid handle slot.
 */
enum FtStatus ft_driver_sample_bn(const struct FtParams *params,
                                  uint64_t master_seed,
                                  uint64_t stream,
                                  size_t grid_points,
                                  struct FtDriver **out);

/*
 Exact fBm by Cholesky factorisation on `grid_points + 1` uniform points.

 # Safety
 `out` must be a valid handle slot.
 */
enum FtStatus ft_driver_exact_fbm(double hurst,
                                  double horizon,
                                  size_t grid_points,
                                  uint64_t master_seed,
                                  uint64_t stream,
                                  struct FtDriver **out);

/*
 Number of grid points.

 # Safety
 `d` must be NULL or a live handle.
 */
size_t ft_driver_len(const struct FtDriver *d);

/*
 # Safety
 See the crate conventions for array getters.
 */
enum FtStatus ft_driver_grid(const struct FtDriver *d, double *buf, size_t cap, size_t *out_len);

/*
 # Safety
 See the crate conventions for array getters.
 */
enum FtStatus ft_driver_values(const struct FtDriver *d, double *buf, size_t cap, size_t *out_len);

/*
 # Safety
 `d` must be NULL or a live handle.
 */
void ft_driver_free(struct FtDriver *d);

/*
 Named coefficient preset (`linear`, `sin-cos`, `arctan-demo`).

 # Safety
 `name` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum FtStatus ft_coeffs_preset(const char *name,
                               double b0,
                               double c,
                               double x0,
                               struct FtCoeffs **out);

/*
 # Safety
 `c` must be NULL or a live handle.
 */
void ft_coeffs_free(struct FtCoeffs *c);

/*
 Reference `Y` by RK4 with step `step`.

 # Safety
 Handles must be live and `out` a valid handle slot.
 */
enum FtStatus ft_solve_reference(const struct FtCoeffs *c,
                                 const struct FtDriver *d,
                                 double step,
                                 struct FtSolution **out);

/*
 Euler `Y^{n,m}`.

 # Safety
 Handles must be live and `out` a valid handle slot.
 */
enum FtStatus ft_solve_euler(const struct FtCoeffs *c,
                             uint64_t n,
                             uint64_t m,
                             const struct FtDriver *d,
                             struct FtSolution **out);

/*
 `X = h(Y, B)` with the exact flow (`euler_n == 0`) or the Euler grid
 flow of resolution `euler_n`.

 # Safety
 Handles must be live and `out` a valid handle slot.
 */
enum FtStatus ft_compose_x(const struct FtCoeffs *c,
                           uint64_t euler_n,
                           const struct FtSolution *y,
                           const struct FtDriver *d,
                           struct FtSolution **out);

/*
 # Safety
 `s` must be NULL or a live handle.
 */
size_t ft_solution_len(const struct FtSolution *s);

/*
 # Safety
 See the crate conventions for array getters.
 */
enum FtStatus ft_solution_grid(const struct FtSolution *s,
                               double *buf,
                               size_t cap,
                               size_t *out_len);

/*
 `FT_STATUS_NOT_APPLICABLE` if the solution has no Y series.

 # Safety
 See the crate conventions for array getters.
 */
enum FtStatus ft_solution_y(const struct FtSolution *s, double *buf, size_t cap, size_t *out_len);

/*
 `FT_STATUS_NOT_APPLICABLE` if the solution has no X series.

 # Safety
 See the crate conventions for array getters.
 */
enum FtStatus ft_solution_x(const struct FtSolution *s, double *buf, size_t cap, size_t *out_len);

/*
 # Safety
 `s` must be NULL or a live handle.
 */
void ft_solution_free(struct FtSolution *s);

/*
 fBm covariance `(s^2H + t^2H - |t-s|^2H) / 2`.

 # Safety
 `out` must be writable.
 */
enum FtStatus ft_fbm_covariance(double hurst, double s, double t, double *out);

/*
 Normalising constant `C_H` of the moving-average representation.

 # Safety
 `out` must be writable.
 */
enum FtStatus ft_normalization_c(double hurst, double *out);

/*
 Rate `n^(-1/2 + beta + delta) (log n)^(5/2)`.

 # Safety
 `out` must be writable.
 */
enum FtStatus ft_alpha_n(double n, double beta, double delta, double *out);

/*
 Flow value `h(x, y)`.

 # Safety
 `c` must be a live handle and `out` writable.
 */
enum FtStatus ft_h_flow(const struct FtCoeffs *c, double x, double y, double *out);

/*
 Euler grid flow `h^n(x, y)`, zero outside `[-n, n]²`.

 # Safety
 `c` must be a live handle and `out` writable.
 */
enum FtStatus ft_h_euler(const struct FtCoeffs *c, uint64_t n, double x, double y, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACTRANS_H */
