/* C interface to the stiefeldp library. Matrices are passed row-major as
 * d*p doubles. Every function returns an sdp_status; on failure the message
 * is available from sdp_last_error() on the calling thread. */
#ifndef STIEFELDP_H
#define STIEFELDP_H

#include <stddef.h>
#include <stdint.h>

#if defined(SDP_BUILDING_LIBRARY)
#define SDP_API __attribute__((visibility("default")))
#else
#define SDP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sdp_status {
  SDP_OK = 0,
  SDP_ERR_INVALID_ARGUMENT = 1,
  SDP_ERR_INVALID_SHAPE = 2,
  SDP_ERR_DEGENERATE_INPUT = 3,
  SDP_ERR_TRUNCATION = 4,
  SDP_ERR_CONCENTRATION_TOO_LARGE = 5,
  SDP_ERR_PARSE = 6,
  SDP_ERR_DATA_QUALITY = 7,
  SDP_ERR_IO = 8,
  SDP_ERR_INVARIANT = 9,
  SDP_ERR_OUT_OF_MEMORY = 98,
  SDP_ERR_INTERNAL = 99
} sdp_status;

typedef enum sdp_sampler {
  SDP_SAMPLER_HAAR_REJECTION = 0,
  SDP_SAMPLER_COLUMN_REJECTION = 1,
  SDP_SAMPLER_AUTO = 2
} sdp_sampler;

typedef struct sdp_rng sdp_rng;
typedef struct sdp_dataset sdp_dataset;
typedef struct sdp_config sdp_config;
typedef struct sdp_chain sdp_chain;

SDP_API const char* sdp_last_error(void);
SDP_API const char* sdp_version(void);

/* random streams */
SDP_API sdp_status sdp_rng_create(uint64_t seed, sdp_rng** out);
SDP_API void sdp_rng_destroy(sdp_rng* rng);

/* manifold */
SDP_API sdp_status sdp_sample_haar(int d, int p, sdp_rng* rng, double* out);
SDP_API sdp_status sdp_project(int d, int p, const double* m, double* out);
SDP_API sdp_status sdp_orthonormality_deviation(int d, int p, const double* m, double* out);

/* log 0F1(half_d; diag(kappa^2)/4); order_used may be NULL */
SDP_API sdp_status sdp_log_0f1(double half_d, const double* kappa, int p, int min_order, double* log_value,
                               int* order_used);
/* Monte Carlo estimate of the normalizer as the Haar mean of etr(F^T X) */
SDP_API sdp_status sdp_mc_normalizer(int d, int p, const double* kappa, size_t n_samples, sdp_rng* rng,
                                     double* estimate, double* std_error);

/* matrix Langevin kernel with location g (d x p) and concentration kappa (p) */
SDP_API sdp_status sdp_langevin_log_density(int d, int p, const double* g, const double* kappa, const double* x,
                                            double* out);
/* writes count frames to out (count*d*p doubles); proposals may be NULL */
SDP_API sdp_status sdp_langevin_sample(int d, int p, const double* g, const double* kappa, sdp_sampler method,
                                       sdp_rng* rng, size_t count, double* out, uint64_t* proposals);
SDP_API sdp_status sdp_langevin_mean(int d, int p, const double* g, const double* kappa, double* mean,
                                     int* near_uniform);

/* datasets */
SDP_API sdp_status sdp_dataset_load(const char* path, sdp_dataset** out);
SDP_API sdp_status sdp_dataset_from_frames(size_t n, int d, int p, const double* frames, sdp_dataset** out);
SDP_API sdp_status sdp_dataset_convert_orbits(const char* path, sdp_dataset** out);
SDP_API sdp_status sdp_dataset_synthetic(uint64_t seed, sdp_dataset** out);
SDP_API sdp_status sdp_dataset_save(const sdp_dataset* ds, const char* path);
SDP_API sdp_status sdp_dataset_info(const sdp_dataset* ds, size_t* n, int* d, int* p, size_t* reprojected);
SDP_API sdp_status sdp_dataset_frame(const sdp_dataset* ds, size_t index, double* out);
SDP_API void sdp_dataset_destroy(sdp_dataset* ds);
/* angles in radians; out receives 6 doubles (3 x 2 row-major) */
SDP_API sdp_status sdp_orbital_frame(double inclination, double lon_ascending_node, double arg_perihelion,
                                     double* out);

/* run configuration */
SDP_API sdp_status sdp_config_default(sdp_config** out);
SDP_API sdp_status sdp_config_load(const char* path, sdp_config** out);
SDP_API sdp_status sdp_config_parse(const char* text, sdp_config** out);
SDP_API sdp_status sdp_config_set_seed(sdp_config* cfg, uint64_t seed);
SDP_API sdp_status sdp_config_set_iterations(sdp_config* cfg, int iters, int burn_in, int thin);
SDP_API sdp_status sdp_config_get_iterations(const sdp_config* cfg, int* iters, int* burn_in, int* thin);
/* copies the canonical text into buf (NUL terminated); *needed gets the full size including NUL */
SDP_API sdp_status sdp_config_render(const sdp_config* cfg, char* buf, size_t capacity, size_t* needed);
SDP_API void sdp_config_destroy(sdp_config* cfg);

/* posterior sampling */
SDP_API sdp_status sdp_fit(const sdp_dataset* ds, const sdp_config* cfg, sdp_chain** out);
SDP_API sdp_status sdp_chain_write(const sdp_chain* chain, const char* outdir);
SDP_API sdp_status sdp_chain_load(const char* rundir, sdp_chain** out);
SDP_API sdp_status sdp_chain_info(const sdp_chain* chain, size_t* retained, int* n, int* d, int* p);
SDP_API sdp_status sdp_chain_summarize(const sdp_chain* chain, const sdp_dataset* ds, const char* outdir,
                                       size_t haar_grid, size_t sphere_grid);
SDP_API sdp_status sdp_chain_log_predictive(const sdp_chain* chain, const double* x, double* out);
SDP_API sdp_status sdp_chain_modal_clusters(const sdp_chain* chain, int min_size, int* out);
SDP_API void sdp_chain_destroy(sdp_chain* chain);

/* diagnostics */
SDP_API sdp_status sdp_phi(const double* kappa, int p, double* out);
/* least-squares slope of log y on log x */
SDP_API sdp_status sdp_log_log_slope(const double* x, const double* y, size_t n, double* out);
SDP_API sdp_status sdp_hellinger_langevin(int d, int p, const double* g1, const double* kappa1, const double* g2,
                                          const double* kappa2, size_t n_samples, sdp_rng* rng, double* estimate,
                                          double* std_error);
/* KL(f0 || f) with f0 = (g0, kappa0) */
SDP_API sdp_status sdp_kl_langevin(int d, int p, const double* g0, const double* kappa0, const double* g,
                                   const double* kappa, size_t n_samples, sdp_rng* rng, double* estimate,
                                   double* std_error);
SDP_API sdp_status sdp_kernel_approx_langevin(int d, int p, const double* g, const double* kappa_f,
                                              const double* kappa_kernel, size_t n_outer, size_t n_inner,
                                              sdp_rng* rng, double* error, double* max_inner_se);
SDP_API sdp_status sdp_lipschitz_location(int d, int p, const double* kappa, size_t trials, sdp_rng* rng,
                                          double* out);
SDP_API sdp_status sdp_lipschitz_concentration(int d, int p, double k_bound, size_t trials, sdp_rng* rng,
                                               double* out);
/* prior_type: "truncated-exponential" (rate, lower), "weibull" (shape, b),
 * "gamma" (shape, rate) or "point-mass" (value). mass/bound/pass receive one
 * entry per n. */
SDP_API sdp_status sdp_tail_check(const char* prior_type, const double* params, size_t n_params, int d, int p,
                                  double a, double beta, const long* n_grid, size_t n_count, size_t draws,
                                  sdp_rng* rng, double* mass, double* bound, int* pass);

#ifdef __cplusplus
}
#endif

#endif
