#include "ebstates.h"

#include <exception>
#include <new>
#include <string>
#include <utility>

#include "ebstates/circuit.hpp"
#include "ebstates/disorder.hpp"
#include "ebstates/eb_analysis.hpp"
#include "ebstates/error.hpp"
#include "ebstates/model.hpp"

struct eb_model {
  ebstates::LatticeModel value;
};
struct eb_matrix {
  ebstates::ComplexMatrix value;
};
struct eb_flow {
  ebstates::FlowTable value;
};
struct eb_ensemble {
  ebstates::EnsembleResult value;
};
struct eb_sweep {
  ebstates::SweepResult value;
};

namespace {

using ebstates::Complex;
using ebstates::ErrorCode;

thread_local std::string last_error;

eb_status record(eb_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

eb_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return EB_ERR_INVALID_ARGUMENT;
    case ErrorCode::defective_point: return EB_ERR_DEFECTIVE_POINT;
    case ErrorCode::singular: return EB_ERR_SINGULAR;
    case ErrorCode::no_convergence: return EB_ERR_NO_CONVERGENCE;
    case ErrorCode::resonance: return EB_ERR_RESONANCE;
    case ErrorCode::ambiguous: return EB_ERR_AMBIGUOUS;
    case ErrorCode::io: return EB_ERR_IO;
  }
  return EB_ERR_INTERNAL;
}

// Runs `fn`, translating every exception into a status code. Nothing may
// propagate across the C boundary.
template <class Fn>
eb_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return EB_OK;
  } catch (const ebstates::Error& e) {
    return record(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(EB_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return record(EB_ERR_INTERNAL, e.what());
  } catch (...) {
    return record(EB_ERR_INTERNAL, "unknown exception");
  }
}

template <class... Ptrs>
bool any_null(const Ptrs*... ptrs) {
  return ((ptrs == nullptr) || ...);
}

eb_status null_pointer(const char* fn) { return record(EB_ERR_NULL_POINTER, std::string(fn) + ": null pointer"); }

eb_status too_small(const char* fn, std::size_t need, std::size_t have) {
  return record(EB_ERR_BUFFER_TOO_SMALL,
                std::string(fn) + ": buffer holds " + std::to_string(have) + ", need " + std::to_string(need));
}

eb_complex to_c(Complex z) { return {z.real(), z.imag()}; }
Complex from_c(eb_complex z) { return {z.re, z.im}; }

ebstates::CircuitSpec to_spec(const eb_circuit_spec& s) {
  ebstates::CircuitSpec out;
  out.c0_nf = s.c0_nf;
  out.c1_nf = s.c1_nf;
  out.c2_nf = s.c2_nf;
  out.c3_nf = s.c3_nf;
  out.c4_nf = s.c4_nf;
  out.c5_nf = s.c5_nf;
  out.inductance_uh = s.inductance_uh;
  out.esr_ohm = s.esr_ohm;
  return out;
}

ebstates::DisorderConfig to_config(const eb_disorder_config& c) {
  ebstates::DisorderConfig out;
  out.delta = c.delta;
  switch (c.mode) {
    case EB_DISORDER_REAL: out.mode = ebstates::DisorderMode::real; break;
    case EB_DISORDER_IMAGINARY: out.mode = ebstates::DisorderMode::imaginary; break;
    case EB_DISORDER_COMPLEX: out.mode = ebstates::DisorderMode::complex; break;
    default: ebstates::fail(ErrorCode::invalid_argument, "disorder mode out of range");
  }
  out.instances = c.instances;
  out.base_seed = c.base_seed;
  out.perturb_diagonal = c.perturb_diagonal != 0;
  out.validate();
  return out;
}

eb_matrix* wrap(ebstates::ComplexMatrix m) { return new eb_matrix{std::move(m)}; }

}  // namespace

extern "C" {

const char* eb_last_error(void) { return last_error.c_str(); }

const char* eb_status_name(eb_status s) {
  switch (s) {
    case EB_OK: return "ok";
    case EB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EB_ERR_DEFECTIVE_POINT: return "defective point";
    case EB_ERR_SINGULAR: return "singular matrix";
    case EB_ERR_NO_CONVERGENCE: return "no convergence";
    case EB_ERR_RESONANCE: return "resonance";
    case EB_ERR_AMBIGUOUS: return "ambiguous";
    case EB_ERR_IO: return "i/o error";
    case EB_ERR_NULL_POINTER: return "null pointer";
    case EB_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case EB_ERR_OUT_OF_MEMORY: return "out of memory";
    case EB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* eb_version(void) { return "0.1.0"; }

// ---- model

eb_status eb_model_create(double a0, int B, int L, eb_model** out) {
  if (!out) return null_pointer("eb_model_create");
  *out = nullptr;
  return guarded([&] { *out = new eb_model{ebstates::LatticeModel::create(a0, B, L)}; });
}

void eb_model_destroy(eb_model* model) { delete model; }

eb_status eb_two_point(const eb_model* model, double* u, double* d, size_t len) {
  if (any_null(model, u, d)) return null_pointer("eb_two_point");
  const auto need = static_cast<std::size_t>(model->value.L);
  if (len < need) return too_small("eb_two_point", need, len);
  return guarded([&] {
    const auto t = ebstates::two_point_functions(model->value);
    std::copy(t.U.begin(), t.U.end(), u);
    std::copy(t.D.begin(), t.D.end(), d);
  });
}

eb_status eb_truncated_projector(const eb_model* model, int x_cut, eb_matrix** out) {
  if (any_null(model, out)) return null_pointer("eb_truncated_projector");
  *out = nullptr;
  return guarded([&] { *out = wrap(ebstates::build_truncated_projector(model->value, x_cut).matrix); });
}

eb_status eb_estimate_lambda(const eb_model* model, int x_cut, eb_lambda_mode mode, double* out) {
  if (any_null(model, out)) return null_pointer("eb_estimate_lambda");
  return guarded([&] {
    ebstates::require(mode == EB_LAMBDA_FULL || mode == EB_LAMBDA_LINEAR, "eb_estimate_lambda: mode out of range");
    *out = ebstates::estimate_lambda_eb(
        model->value, x_cut, mode == EB_LAMBDA_FULL ? ebstates::LambdaEstimate::full : ebstates::LambdaEstimate::linear);
  });
}

// ---- matrices

eb_status eb_matrix_create(const eb_complex* data, size_t n, eb_matrix** out) {
  if (any_null(data, out)) return null_pointer("eb_matrix_create");
  *out = nullptr;
  return guarded([&] {
    ebstates::require(n > 0, "eb_matrix_create: dimension must be positive");
    const auto dim = static_cast<Eigen::Index>(n);
    ebstates::ComplexMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = from_c(data[i * dim + j]);
    *out = wrap(std::move(m));
  });
}

void eb_matrix_destroy(eb_matrix* m) { delete m; }

size_t eb_matrix_dim(const eb_matrix* m) { return m ? static_cast<size_t>(m->value.rows()) : 0; }

eb_status eb_matrix_get(const eb_matrix* m, size_t row, size_t col, eb_complex* out) {
  if (any_null(m, out)) return null_pointer("eb_matrix_get");
  const auto dim = static_cast<size_t>(m->value.rows());
  if (row >= dim || col >= dim)
    return record(EB_ERR_INVALID_ARGUMENT, "eb_matrix_get: index (" + std::to_string(row) + ", " +
                                               std::to_string(col) + ") outside " + std::to_string(dim));
  *out = to_c(m->value(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)));
  return EB_OK;
}

eb_status eb_matrix_copy(const eb_matrix* m, eb_complex* buffer, size_t len) {
  if (any_null(m, buffer)) return null_pointer("eb_matrix_copy");
  const auto dim = static_cast<size_t>(m->value.rows());
  if (len < dim * dim) return too_small("eb_matrix_copy", dim * dim, len);
  for (size_t i = 0; i < dim; ++i)
    for (size_t j = 0; j < dim; ++j)
      buffer[i * dim + j] = to_c(m->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return EB_OK;
}

eb_status eb_matrix_eigenvalues(const eb_matrix* m, eb_complex* out, size_t len) {
  if (any_null(m, out)) return null_pointer("eb_matrix_eigenvalues");
  const auto dim = static_cast<size_t>(m->value.rows());
  if (len < dim) return too_small("eb_matrix_eigenvalues", dim, len);
  return guarded([&] {
    const auto ev = ebstates::eigenvalues(m->value);
    for (size_t i = 0; i < ev.size(); ++i) out[i] = to_c(ev[i]);
  });
}

eb_status eb_lambda_operator(const eb_matrix* p, eb_matrix** out, double* off_block_norm) {
  if (any_null(p, out)) return null_pointer("eb_lambda_operator");
  *out = nullptr;
  return guarded([&] {
    ebstates::TruncatedProjector tp;
    tp.matrix = p->value;
    auto op = ebstates::lambda_operator(tp);
    if (off_block_norm) *off_block_norm = op.off_block_norm;
    *out = wrap(std::move(op.matrix));
  });
}

// ---- analysis

double eb_default_threshold(void) { return ebstates::kDefaultEbThreshold; }

eb_status eb_is_eb(eb_complex p, double threshold, int* out) {
  if (!out) return null_pointer("eb_is_eb");
  return guarded([&] {
    const Complex z = from_c(p);
    *out = ebstates::classify(std::span<const Complex>(&z, 1), threshold).is_eb[0] ? 1 : 0;
  });
}

eb_status eb_flow_compute(const eb_model* model, int x_min, int x_max, double threshold, eb_flow** out) {
  if (any_null(model, out)) return null_pointer("eb_flow_compute");
  *out = nullptr;
  return guarded([&] { *out = new eb_flow{ebstates::spectral_flow(model->value, x_min, x_max, threshold)}; });
}

void eb_flow_destroy(eb_flow* flow) { delete flow; }

size_t eb_flow_row_count(const eb_flow* flow) { return flow ? flow->value.rows.size() : 0; }

eb_status eb_flow_row(const eb_flow* flow, size_t row, int* x_cut, size_t* count, int* failed) {
  if (!flow) return null_pointer("eb_flow_row");
  if (row >= flow->value.rows.size()) return record(EB_ERR_INVALID_ARGUMENT, "eb_flow_row: row out of range");
  const auto& r = flow->value.rows[row];
  if (x_cut) *x_cut = r.x_cut;
  if (count) *count = r.eigenvalues.size();
  if (failed) *failed = r.failed ? 1 : 0;
  return EB_OK;
}

eb_status eb_flow_row_values(const eb_flow* flow, size_t row, eb_complex* values, int* is_eb, size_t len) {
  if (any_null(flow, values)) return null_pointer("eb_flow_row_values");
  if (row >= flow->value.rows.size()) return record(EB_ERR_INVALID_ARGUMENT, "eb_flow_row_values: row out of range");
  const auto& r = flow->value.rows[row];
  if (len < r.eigenvalues.size()) return too_small("eb_flow_row_values", r.eigenvalues.size(), len);
  for (size_t i = 0; i < r.eigenvalues.size(); ++i) {
    values[i] = to_c(r.eigenvalues[i]);
    if (is_eb) is_eb[i] = r.is_eb[i] ? 1 : 0;
  }
  return EB_OK;
}

const char* eb_flow_row_error(const eb_flow* flow, size_t row) {
  if (!flow || row >= flow->value.rows.size()) return "";
  return flow->value.rows[row].error.c_str();
}

eb_status eb_fit_scaling(const double* sizes, const double* values, size_t n, eb_scaling_fit* out) {
  if (any_null(sizes, values, out)) return null_pointer("eb_fit_scaling");
  return guarded([&] {
    std::vector<std::pair<double, double>> samples;
    for (size_t i = 0; i < n; ++i) samples.emplace_back(sizes[i], values[i]);
    const auto fit = ebstates::fit_scaling(samples);
    *out = {fit.exponent, fit.prefactor, fit.r_squared};
  });
}

eb_status eb_entropy(const eb_complex* spectrum, size_t n, double* real_part, double* imag_remnant) {
  if (any_null(real_part, imag_remnant) || (n > 0 && !spectrum)) return null_pointer("eb_entropy");
  return guarded([&] {
    std::vector<Complex> s;
    for (size_t i = 0; i < n; ++i) s.push_back(from_c(spectrum[i]));
    const auto e = ebstates::entanglement_entropy(s);
    *real_part = e.real;
    *imag_remnant = e.imag_remnant;
  });
}

// ---- disorder

eb_status eb_disorder_perturb(const eb_matrix* p, const eb_disorder_config* cfg, uint64_t instance,
                              eb_matrix** out) {
  if (any_null(p, cfg, out)) return null_pointer("eb_disorder_perturb");
  *out = nullptr;
  return guarded([&] { *out = wrap(ebstates::perturb(p->value, to_config(*cfg), instance)); });
}

eb_status eb_ensemble_run(const eb_model* model, int x_cut, const eb_disorder_config* cfg, double threshold,
                          eb_ensemble** out) {
  if (any_null(model, cfg, out)) return null_pointer("eb_ensemble_run");
  *out = nullptr;
  return guarded(
      [&] { *out = new eb_ensemble{ebstates::run_ensemble(model->value, x_cut, to_config(*cfg), threshold)}; });
}

void eb_ensemble_destroy(eb_ensemble* ens) { delete ens; }

eb_status eb_ensemble_summary_get(const eb_ensemble* ens, eb_ensemble_summary* out) {
  if (any_null(ens, out)) return null_pointer("eb_ensemble_summary_get");
  const auto& r = ens->value;
  out->instances = r.spectra.size();
  out->failed_instances = r.failed_instances;
  out->reference_eb_count = r.reference_eb.size();
  out->eb_fractional_spread = r.eb_fractional_spread;
  out->min_cluster_gap = r.min_cluster_gap;
  out->non_eb_cloud_radius = r.non_eb_cloud_radius;
  out->non_eb_clouds_resolved = r.non_eb_clouds_resolved ? 1 : 0;
  return EB_OK;
}

eb_status eb_ensemble_reference(const eb_ensemble* ens, eb_complex* reference, eb_complex* centroids, size_t len) {
  if (!ens) return null_pointer("eb_ensemble_reference");
  const auto& r = ens->value;
  if (len < r.reference_eb.size()) return too_small("eb_ensemble_reference", r.reference_eb.size(), len);
  for (size_t i = 0; i < r.reference_eb.size(); ++i) {
    if (reference) reference[i] = to_c(r.reference_eb[i]);
    if (centroids) centroids[i] = to_c(r.eb_cluster_centroids[i]);
  }
  return EB_OK;
}

eb_status eb_ensemble_instance(const eb_ensemble* ens, size_t instance, eb_complex* values, int* is_eb, size_t len,
                               size_t* count) {
  if (!ens) return null_pointer("eb_ensemble_instance");
  const auto& r = ens->value;
  if (instance >= r.spectra.size())
    return record(EB_ERR_INVALID_ARGUMENT, "eb_ensemble_instance: instance out of range");
  const auto& spec = r.spectra[instance];
  if (count) *count = spec.size();
  if (!values && !is_eb) return EB_OK;
  if (len < spec.size()) return too_small("eb_ensemble_instance", spec.size(), len);
  for (size_t i = 0; i < spec.size(); ++i) {
    if (values) values[i] = to_c(spec[i]);
    if (is_eb) is_eb[i] = r.is_eb[instance][i] ? 1 : 0;
  }
  return EB_OK;
}

const char* eb_ensemble_instance_error(const eb_ensemble* ens, size_t instance) {
  if (!ens || instance >= ens->value.failures.size()) return "";
  return ens->value.failures[instance].c_str();
}

// ---- circuit

void eb_circuit_spec_default(eb_circuit_spec* out) {
  if (!out) return;
  const ebstates::CircuitSpec d;
  *out = {d.c0_nf, d.c1_nf, d.c2_nf, d.c3_nf, d.c4_nf, d.c5_nf, d.inductance_uh, d.esr_ohm};
}

eb_status eb_circuit_laplacian(const eb_circuit_spec* spec, double omega, eb_matrix** out) {
  if (any_null(spec, out)) return null_pointer("eb_circuit_laplacian");
  *out = nullptr;
  return guarded([&] { *out = wrap(ebstates::build_laplacian(to_spec(*spec), omega)); });
}

eb_status eb_circuit_projector(const eb_circuit_spec* spec, eb_matrix** out) {
  if (any_null(spec, out)) return null_pointer("eb_circuit_projector");
  *out = nullptr;
  return guarded([&] { *out = wrap(ebstates::effective_projector(to_spec(*spec))); });
}

eb_status eb_circuit_freq_of_eigenvalue(const eb_circuit_spec* spec, double p, double* f_hz) {
  if (any_null(spec, f_hz)) return null_pointer("eb_circuit_freq_of_eigenvalue");
  return guarded([&] { *f_hz = ebstates::freq_of_eigenvalue(to_spec(*spec), p); });
}

eb_status eb_circuit_eigenvalue_of_freq(const eb_circuit_spec* spec, double f_hz, double* p) {
  if (any_null(spec, p)) return null_pointer("eb_circuit_eigenvalue_of_freq");
  return guarded([&] { *p = ebstates::eigenvalue_of_freq(to_spec(*spec), f_hz); });
}

eb_status eb_circuit_drive_response(const eb_circuit_spec* spec, double omega, int drive_node, double amplitude,
                                    double reg, eb_complex voltages[EB_CIRCUIT_NODES]) {
  if (any_null(spec, voltages)) return null_pointer("eb_circuit_drive_response");
  return guarded([&] {
    const auto v = ebstates::drive_response(to_spec(*spec), omega, drive_node, amplitude, reg);
    for (Eigen::Index i = 0; i < v.size(); ++i) voltages[i] = to_c(v(i));
  });
}

eb_status eb_circuit_impedance(const eb_circuit_spec* spec, double omega, int i, int j, eb_impedance_method method,
                               eb_complex* out) {
  if (any_null(spec, out)) return null_pointer("eb_circuit_impedance");
  return guarded([&] {
    ebstates::require(method == EB_IMPEDANCE_EIGEN || method == EB_IMPEDANCE_DIRECT,
                      "eb_circuit_impedance: method out of range");
    *out = to_c(ebstates::impedance(to_spec(*spec), omega, i, j,
                                    method == EB_IMPEDANCE_EIGEN ? ebstates::ImpedanceMethod::eigen
                                                                 : ebstates::ImpedanceMethod::direct));
  });
}

eb_status eb_circuit_sweep(const eb_circuit_spec* spec, double f_min_hz, double f_max_hz, int points, int drive_node,
                           double peak_threshold, eb_sweep** out) {
  if (any_null(spec, out)) return null_pointer("eb_circuit_sweep");
  *out = nullptr;
  return guarded([&] {
    *out = new eb_sweep{ebstates::sweep(to_spec(*spec), f_min_hz, f_max_hz, points, drive_node, peak_threshold)};
  });
}

void eb_sweep_destroy(eb_sweep* sweep) { delete sweep; }

size_t eb_sweep_row_count(const eb_sweep* sweep) { return sweep ? sweep->value.rows.size() : 0; }

eb_status eb_sweep_row(const eb_sweep* sweep, size_t row, double* f_hz, eb_complex voltages[EB_CIRCUIT_NODES],
                       eb_complex* impedance_ground) {
  if (!sweep) return null_pointer("eb_sweep_row");
  if (row >= sweep->value.rows.size()) return record(EB_ERR_INVALID_ARGUMENT, "eb_sweep_row: row out of range");
  const auto& r = sweep->value.rows[row];
  if (f_hz) *f_hz = r.frequency_hz;
  if (voltages)
    for (Eigen::Index i = 0; i < r.node_voltages.size(); ++i) voltages[i] = to_c(r.node_voltages(i));
  if (impedance_ground) *impedance_ground = to_c(r.impedance_ground);
  return EB_OK;
}

size_t eb_sweep_peak_count(const eb_sweep* sweep) { return sweep ? sweep->value.detected_peaks.size() : 0; }

eb_status eb_sweep_peak(const eb_sweep* sweep, size_t peak, double* f_hz, double* mapped_eigenvalue,
                        double* amplitude) {
  if (!sweep) return null_pointer("eb_sweep_peak");
  if (peak >= sweep->value.detected_peaks.size())
    return record(EB_ERR_INVALID_ARGUMENT, "eb_sweep_peak: peak out of range");
  const auto& p = sweep->value.detected_peaks[peak];
  if (f_hz) *f_hz = p.frequency_hz;
  if (mapped_eigenvalue) *mapped_eigenvalue = p.mapped_eigenvalue;
  if (amplitude) *amplitude = p.amplitude;
  return EB_OK;
}

double eb_sweep_median_amplitude(const eb_sweep* sweep) { return sweep ? sweep->value.median_amplitude : 0.0; }

eb_status eb_circuit_reconstruct(const eb_circuit_spec* spec, double omega, double noise_fraction, uint64_t seed,
                                 eb_matrix** laplacian, eb_matrix** projector, double* condition_number,
                                 int* near_resonant) {
  if (!spec) return null_pointer("eb_circuit_reconstruct");
  if (laplacian) *laplacian = nullptr;
  if (projector) *projector = nullptr;
  return guarded([&] {
    auto r = ebstates::reconstruct_laplacian(to_spec(*spec), omega, noise_fraction, seed);
    if (condition_number) *condition_number = r.condition_number;
    if (near_resonant) *near_resonant = r.near_resonant ? 1 : 0;
    if (laplacian) *laplacian = wrap(std::move(r.laplacian));
    if (projector) *projector = wrap(std::move(r.projector));
  });
}

}  // extern "C"
