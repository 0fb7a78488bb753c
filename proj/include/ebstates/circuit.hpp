#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "ebstates/linalg.hpp"

namespace ebstates {

/// Six-node LC network with INIC couplings. Capacitances in nF, inductance
/// in uH, inductor series resistance in ohm. Nodes 1..6 are
/// (cell, sublattice) = (1,up) (1,down) (2,up) (2,down) (3,up) (3,down).
struct CircuitSpec {
  double c0_nf = 1.0;
  double c1_nf = 4.55;
  double c2_nf = 2.87;
  double c3_nf = 4.3;
  double c4_nf = 3.04;
  double c5_nf = 0.50;
  double inductance_uh = 10.0;
  double esr_ohm = 0.0;

  static constexpr int node_count = 6;

  void validate() const;
  /// C1 + 2 C2 + C3 + 2 C4 in farad.
  double coupling_sum_f() const;
};

/// Current-voltage block of an INIC with identical feedback impedances:
/// i w C [[-1, 1], [-1, 1]]. Seen from terminal 1 it is a negative
/// capacitor, from terminal 2 a positive one.
ComplexMatrix inic_block(double capacitance_f, double omega);

/// J(w) = J_g + i w J_c with the grounded inductor admittance
/// 1 / (i w L + esr).
ComplexMatrix build_laplacian(const CircuitSpec& spec, double omega);

/// The 6x6 matrix P' whose eigenvalue equation J V = 0 encodes.
ComplexMatrix effective_projector(const CircuitSpec& spec);

/// f = 1 / (2 pi sqrt(L C0 (p + Csum / C0))).
double freq_of_eigenvalue(const CircuitSpec& spec, double p);
double eigenvalue_of_freq(const CircuitSpec& spec, double f_hz);

/// Node voltages for an ideal current source of `amplitude` amperes into
/// `drive_node` (1-based), with `reg` forwarded to the linear solve.
ComplexVector drive_response(const CircuitSpec& spec, double omega, int drive_node, double amplitude = 1.0,
                             double reg = 0.0);

enum class ImpedanceMethod { eigen, direct };

/// Two-point impedance between nodes i and j (1-based, i != j).
Complex impedance(const CircuitSpec& spec, double omega, int i, int j, ImpedanceMethod method);

/// Drive-node-to-ground impedance V_d / I_d.
Complex ground_impedance(const CircuitSpec& spec, double omega, int node, double reg = 0.0);

struct SweepRow {
  double frequency_hz = 0.0;
  ComplexVector node_voltages;
  Complex impedance_ground;
  double total_amplitude = 0.0;  // sum_n |V_n|
};

struct SweepPeak {
  double frequency_hz = 0.0;
  double mapped_eigenvalue = 0.0;
  double amplitude = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepPeak> detected_peaks;
  double median_amplitude = 0.0;
};

inline constexpr double kDefaultPeakThreshold = 3.0;

/// Uniform sweep over [f_min, f_max]. Peaks are local maxima of sum |V|
/// above `peak_threshold` times the median of the sweep.
SweepResult sweep(const CircuitSpec& spec, double f_min_hz, double f_max_hz, int points, int drive_node,
                  double peak_threshold = kDefaultPeakThreshold);

struct Reconstruction {
  ComplexMatrix laplacian;
  ComplexMatrix projector;
  double condition_number = 0.0;
  bool near_resonant = false;
};

/// Condition number of J above which a reconstruction is flagged.
inline constexpr double kNearResonantCondition = 1e3;

/// Simulates unit-current injection at each node, perturbs every measured
/// voltage by a factor 1 + u (u uniform on [-noise, noise]), inverts the
/// measured J^{-1} and maps the result back onto P'.
Reconstruction reconstruct_laplacian(const CircuitSpec& spec, double omega, double noise_fraction,
                                     std::uint64_t seed);

}  // namespace ebstates
