/* C interface to the ebstates library.
 *
 * Every function returns an eb_status. On failure the thread-local message
 * from eb_last_error() describes what went wrong; it stays valid until the
 * next failing call on the same thread. Objects are opaque handles owned by
 * the caller and released with the matching *_destroy function (passing
 * NULL is allowed). Circuit nodes are 1-based, matrix indices 0-based.
 */
#ifndef EBSTATES_H
#define EBSTATES_H

#include <stddef.h>
#include <stdint.h>

#if defined(EBSTATES_BUILDING_LIBRARY)
#define EB_API __attribute__((visibility("default")))
#else
#define EB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eb_status {
  EB_OK = 0,
  EB_ERR_INVALID_ARGUMENT = 1,
  EB_ERR_DEFECTIVE_POINT = 2,
  EB_ERR_SINGULAR = 3,
  EB_ERR_NO_CONVERGENCE = 4,
  EB_ERR_RESONANCE = 5,
  EB_ERR_AMBIGUOUS = 6,
  EB_ERR_IO = 7,
  EB_ERR_NULL_POINTER = 100,
  EB_ERR_BUFFER_TOO_SMALL = 101,
  EB_ERR_OUT_OF_MEMORY = 102,
  EB_ERR_INTERNAL = 103
} eb_status;

typedef struct eb_complex {
  double re;
  double im;
} eb_complex;

EB_API const char* eb_last_error(void);
EB_API const char* eb_status_name(eb_status status);
EB_API const char* eb_version(void);

/* ---- lattice model ---------------------------------------------------- */

typedef struct eb_model eb_model;
typedef struct eb_matrix eb_matrix;

EB_API eb_status eb_model_create(double a0, int B, int L, eb_model** out);
EB_API void eb_model_destroy(eb_model* model);

/* U_x and D_x for x = 0..L-1; both buffers need L entries. */
EB_API eb_status eb_two_point(const eb_model* model, double* u, double* d, size_t len);

EB_API eb_status eb_truncated_projector(const eb_model* model, int x_cut, eb_matrix** out);

typedef enum eb_lambda_mode { EB_LAMBDA_FULL = 0, EB_LAMBDA_LINEAR = 1 } eb_lambda_mode;

EB_API eb_status eb_estimate_lambda(const eb_model* model, int x_cut, eb_lambda_mode mode, double* out);

/* ---- dense complex matrices ------------------------------------------- */

/* Copies an n x n row-major buffer. */
EB_API eb_status eb_matrix_create(const eb_complex* data, size_t n, eb_matrix** out);
EB_API void eb_matrix_destroy(eb_matrix* m);
EB_API size_t eb_matrix_dim(const eb_matrix* m);
EB_API eb_status eb_matrix_get(const eb_matrix* m, size_t row, size_t col, eb_complex* out);
/* Row-major copy into `buffer`, which must hold dim * dim entries. */
EB_API eb_status eb_matrix_copy(const eb_matrix* m, eb_complex* buffer, size_t len);
/* Eigenvalues into `out` (dim entries), in solver order. */
EB_API eb_status eb_matrix_eigenvalues(const eb_matrix* m, eb_complex* out, size_t len);
/* 4 (P^2 - P) and the Frobenius norm of its up/down mixing blocks. */
EB_API eb_status eb_lambda_operator(const eb_matrix* p, eb_matrix** out, double* off_block_norm);

/* ---- EB analysis ------------------------------------------------------ */

EB_API double eb_default_threshold(void);
EB_API eb_status eb_is_eb(eb_complex p, double threshold, int* out);

typedef struct eb_flow eb_flow;

EB_API eb_status eb_flow_compute(const eb_model* model, int x_min, int x_max, double threshold, eb_flow** out);
EB_API void eb_flow_destroy(eb_flow* flow);
EB_API size_t eb_flow_row_count(const eb_flow* flow);
/* Row metadata. `count` is the number of eigenvalues (0 for failed rows). */
EB_API eb_status eb_flow_row(const eb_flow* flow, size_t row, int* x_cut, size_t* count, int* failed);
/* Eigenvalues of a row sorted by (re, im) and their EB flags. `is_eb` may be NULL. */
EB_API eb_status eb_flow_row_values(const eb_flow* flow, size_t row, eb_complex* values, int* is_eb, size_t len);
/* Error text of a failed row, "" otherwise. Owned by the flow. */
EB_API const char* eb_flow_row_error(const eb_flow* flow, size_t row);

typedef struct eb_scaling_fit {
  double exponent;
  double prefactor;
  double r_squared;
} eb_scaling_fit;

EB_API eb_status eb_fit_scaling(const double* sizes, const double* values, size_t n, eb_scaling_fit* out);

EB_API eb_status eb_entropy(const eb_complex* spectrum, size_t n, double* real_part, double* imag_remnant);

/* ---- disorder ---------------------------------------------------------- */

typedef enum eb_disorder_mode {
  EB_DISORDER_REAL = 0,
  EB_DISORDER_IMAGINARY = 1,
  EB_DISORDER_COMPLEX = 2
} eb_disorder_mode;

typedef struct eb_disorder_config {
  double delta;
  eb_disorder_mode mode;
  int instances;
  uint64_t base_seed;
  int perturb_diagonal;
} eb_disorder_config;

typedef struct eb_ensemble eb_ensemble;

typedef struct eb_ensemble_summary {
  size_t instances;
  size_t failed_instances;
  size_t reference_eb_count;
  double eb_fractional_spread;
  double min_cluster_gap;
  double non_eb_cloud_radius;
  int non_eb_clouds_resolved;
} eb_ensemble_summary;

EB_API eb_status eb_disorder_perturb(const eb_matrix* p, const eb_disorder_config* cfg, uint64_t instance,
                                     eb_matrix** out);
EB_API eb_status eb_ensemble_run(const eb_model* model, int x_cut, const eb_disorder_config* cfg, double threshold,
                                 eb_ensemble** out);
EB_API void eb_ensemble_destroy(eb_ensemble* ens);
EB_API eb_status eb_ensemble_summary_get(const eb_ensemble* ens, eb_ensemble_summary* out);
/* Clean EB values and ensemble centroids; each buffer needs reference_eb_count entries. */
EB_API eb_status eb_ensemble_reference(const eb_ensemble* ens, eb_complex* reference, eb_complex* centroids,
                                       size_t len);
/* Spectrum of one instance. A failed instance yields count 0 and its error via
 * eb_ensemble_instance_error. `values`/`is_eb` may be NULL to query count. */
EB_API eb_status eb_ensemble_instance(const eb_ensemble* ens, size_t instance, eb_complex* values, int* is_eb,
                                      size_t len, size_t* count);
EB_API const char* eb_ensemble_instance_error(const eb_ensemble* ens, size_t instance);

/* ---- circuit ------------------------------------------------------------ */

#define EB_CIRCUIT_NODES 6

typedef struct eb_circuit_spec {
  double c0_nf, c1_nf, c2_nf, c3_nf, c4_nf, c5_nf;
  double inductance_uh;
  double esr_ohm;
} eb_circuit_spec;

typedef enum eb_impedance_method { EB_IMPEDANCE_EIGEN = 0, EB_IMPEDANCE_DIRECT = 1 } eb_impedance_method;

EB_API void eb_circuit_spec_default(eb_circuit_spec* out);
EB_API eb_status eb_circuit_laplacian(const eb_circuit_spec* spec, double omega, eb_matrix** out);
EB_API eb_status eb_circuit_projector(const eb_circuit_spec* spec, eb_matrix** out);
EB_API eb_status eb_circuit_freq_of_eigenvalue(const eb_circuit_spec* spec, double p, double* f_hz);
EB_API eb_status eb_circuit_eigenvalue_of_freq(const eb_circuit_spec* spec, double f_hz, double* p);
EB_API eb_status eb_circuit_drive_response(const eb_circuit_spec* spec, double omega, int drive_node, double amplitude,
                                           double reg, eb_complex voltages[EB_CIRCUIT_NODES]);
EB_API eb_status eb_circuit_impedance(const eb_circuit_spec* spec, double omega, int i, int j,
                                      eb_impedance_method method, eb_complex* out);

typedef struct eb_sweep eb_sweep;

EB_API eb_status eb_circuit_sweep(const eb_circuit_spec* spec, double f_min_hz, double f_max_hz, int points,
                                  int drive_node, double peak_threshold, eb_sweep** out);
EB_API void eb_sweep_destroy(eb_sweep* sweep);
EB_API size_t eb_sweep_row_count(const eb_sweep* sweep);
EB_API eb_status eb_sweep_row(const eb_sweep* sweep, size_t row, double* f_hz, eb_complex voltages[EB_CIRCUIT_NODES],
                              eb_complex* impedance_ground);
EB_API size_t eb_sweep_peak_count(const eb_sweep* sweep);
EB_API eb_status eb_sweep_peak(const eb_sweep* sweep, size_t peak, double* f_hz, double* mapped_eigenvalue,
                               double* amplitude);
EB_API double eb_sweep_median_amplitude(const eb_sweep* sweep);

/* Outputs may be NULL when not needed. */
EB_API eb_status eb_circuit_reconstruct(const eb_circuit_spec* spec, double omega, double noise_fraction,
                                        uint64_t seed, eb_matrix** laplacian, eb_matrix** projector,
                                        double* condition_number, int* near_resonant);

#ifdef __cplusplus
}
#endif

#endif /* EBSTATES_H */
