/* possim C API: opaque handles and integer status codes over the C++ core.
 * All functions return a possim_status unless noted; on failure the
 * thread-local message from possim_last_error() describes the problem. */

#ifndef POSSIM_POSSIM_H
#define POSSIM_POSSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum possim_status {
    POSSIM_OK = 0,
    POSSIM_ERR_ARGUMENT = 1,
    POSSIM_ERR_CONFIG = 2,
    POSSIM_ERR_FIXTURE = 3,
    POSSIM_ERR_NUMERIC = 4,
    POSSIM_ERR_IO = 5
} possim_status;

typedef struct possim_model possim_model;
typedef struct possim_dataset possim_dataset;

/* Last error message for the calling thread; empty string when none. */
const char* possim_last_error(void);

/* Global worker count for parallel loops; n <= 0 restores the default. */
void possim_set_threads(int n);

/* --- datasets --------------------------------------------------------- */

possim_status possim_dataset_read_csv(const char* path, possim_dataset** out);
/* values is row-major n x width. */
possim_status possim_dataset_create(const double* values, size_t n, size_t width,
                                    possim_dataset** out);
void possim_dataset_free(possim_dataset* d);
size_t possim_dataset_rows(const possim_dataset* d);
size_t possim_dataset_cols(const possim_dataset* d);

/* --- models ----------------------------------------------------------- */

/* name: normal, normal-fixed-sigma, gamma, binomial-logistic, multinomial,
 * linear-regression. hyper_json: e.g. "{\"trials\": 6}" or NULL. */
possim_status possim_model_create(const char* name, const char* hyper_json,
                                  possim_model** out);
void possim_model_free(possim_model* m);
int possim_model_dim(const possim_model* m);

possim_status possim_mle(const possim_model* m, const possim_dataset* z,
                         double* theta_out /* dim */);

possim_status possim_relative_likelihood(const possim_model* m, const possim_dataset* z,
                                         const double* theta, double* out);

/* --- contours --------------------------------------------------------- */

/* Monte Carlo possibility contour at theta; M >= 100. */
possim_status possim_contour_mc(const possim_model* m, const possim_dataset* z,
                                const double* theta, size_t M, uint64_t seed,
                                double* out);

/* Chi-square (Wilks) approximation of the same contour. */
possim_status possim_contour_wilks(const possim_model* m, const possim_dataset* z,
                                   const double* theta, double* out);

/* Gaussian possibility contour 1 - F_d(Mahalanobis^2); cov is row-major d x d. */
possim_status possim_gaussian_contour(const double* mean, const double* cov, int d,
                                      const double* y, double* out);

/* --- batch driver ------------------------------------------------------ */

/* Runs one JSON-configured command (the CLI's engine). Returns the CLI exit
 * status: 0 ok, 2 bad config, 3 fixture mismatch, 4 numeric failure.
 * out_path may be NULL (config's "out" is used); seed_override may be NULL. */
int possim_run_json(const char* config_json, const char* out_path, int threads,
                    int verbose, const char* seed_override);

#ifdef __cplusplus
}
#endif

#endif /* POSSIM_POSSIM_H */
