#include "ebstates/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "ebstates/error.hpp"
#include "parallel.hpp"

namespace ebstates {

namespace {

constexpr double kNano = 1e-9;
constexpr double kMicro = 1e-6;
constexpr Complex kI(0.0, 1.0);

void check_node(int node, std::string_view what) {
  if (node < 1 || node > CircuitSpec::node_count) {
    std::ostringstream os;
    os << what << ": node " << node << " outside [1, " << CircuitSpec::node_count << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
}

void check_omega(double omega, std::string_view what) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    std::ostringstream os;
    os << what << ": angular frequency must be positive and finite, got " << omega;
    fail(ErrorCode::invalid_argument, os.str());
  }
}

Complex inductor_admittance(const CircuitSpec& s, double omega) {
  return 1.0 / (kI * omega * s.inductance_uh * kMicro + s.esr_ohm);
}

double largest_over_smallest(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace

void CircuitSpec::validate() const {
  for (const double c : {c0_nf, c1_nf, c2_nf, c3_nf, c4_nf, c5_nf})
    require(std::isfinite(c) && c > 0.0, "circuit: capacitances must be positive");
  require(std::isfinite(inductance_uh) && inductance_uh > 0.0, "circuit: inductance must be positive");
  require(std::isfinite(esr_ohm) && esr_ohm >= 0.0, "circuit: esr must be non-negative");
}

double CircuitSpec::coupling_sum_f() const { return (c1_nf + 2.0 * c2_nf + c3_nf + 2.0 * c4_nf) * kNano; }

ComplexMatrix inic_block(double capacitance_f, double omega) {
  require(capacitance_f > 0.0, "inic_block: capacitance must be positive");
  check_omega(omega, "inic_block");
  ComplexMatrix m(2, 2);
  m << -1.0, 1.0, -1.0, 1.0;
  return kI * omega * capacitance_f * m;
}

ComplexMatrix build_laplacian(const CircuitSpec& spec, double omega) {
  spec.validate();
  check_omega(omega, "build_laplacian");
  const double c1 = spec.c1_nf * kNano, c2 = spec.c2_nf * kNano, c3 = spec.c3_nf * kNano,
               c4 = spec.c4_nf * kNano, c5 = spec.c5_nf * kNano;

  // Grounded capacitors per node. Node 4 carries 2 C3 + 4 C4 so that every
  // row of (grounded + coupling) sums to C1 + 2 C2 + C3 + 2 C4.
  Eigen::VectorXd grounded(6);
  grounded << c2 + c4, c2 + 2 * c3 + 3 * c4, 0.0, 2 * c3 + 4 * c4, c2 + c4, c2 + 2 * c3 + 3 * c4;

  Eigen::MatrixXd coupling(6, 6);
  // clang-format off
  coupling <<
    c1 + c2 + c3 + c4, -c3 - c1,          0,                           -c4 - c2,                    0,                 0,
    c3 - c1,           c1 + c2 - c3 - c4, c4 - c2,                     0,                           0,                 0,
    0,                 -c2 - c4,          c1 + 2 * c2 + c3 + 2 * c4,   -c1 - c3,                    0,                 -c2 - c4,
    c4 - c2,           0,                 c3 - c1,                     c1 + 2 * c2 - c3 - 2 * c4,   c4 - c2,           0,
    0,                 0,                 0,                           -c2 - c4,                    c1 + c2 + c3 + c4, -c1 - c3,
    0,                 0,                 c4 - c2,                     0,                           c3 - c1,           c1 + c2 - c3 - c4;
  // clang-format on

  ComplexMatrix J = kI * omega * (coupling + Eigen::MatrixXd(grounded.asDiagonal())).cast<Complex>();
  J.diagonal().array() += inductor_admittance(spec, omega) + kI * omega * c5;
  return J;
}

ComplexMatrix effective_projector(const CircuitSpec& spec) {
  spec.validate();
  const double c1 = spec.c1_nf, c2 = spec.c2_nf, c3 = spec.c3_nf, c4 = spec.c4_nf, c5 = spec.c5_nf;
  const Eigen::Matrix2d sx{{0, 1}, {1, 0}};
  const Eigen::Matrix2d isy{{0, 1}, {-1, 0}};  // i * sigma_y
  const Eigen::Matrix2d c13 = c5 * Eigen::Matrix2d::Identity() - c1 * sx - c3 * isy;
  const Eigen::Matrix2d c24 = -c2 * sx - c4 * isy;

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(6, 6);
  for (int b = 0; b < 3; ++b) {
    p.block<2, 2>(2 * b, 2 * b) = c13;
    if (b + 1 < 3) {
      p.block<2, 2>(2 * b, 2 * b + 2) = c24;
      p.block<2, 2>(2 * b + 2, 2 * b) = c24;
    }
  }
  return (p / spec.c0_nf).cast<Complex>();
}

double freq_of_eigenvalue(const CircuitSpec& spec, double p) {
  spec.validate();
  const double c0 = spec.c0_nf * kNano;
  const double radicand = p + spec.coupling_sum_f() / c0;
  if (!(radicand > 0.0)) {
    std::ostringstream os;
    os << "freq_of_eigenvalue: p = " << p << " gives a non-positive radicand " << radicand;
    fail(ErrorCode::invalid_argument, os.str());
  }
  return 1.0 / (2.0 * std::numbers::pi * std::sqrt(spec.inductance_uh * kMicro * c0 * radicand));
}

double eigenvalue_of_freq(const CircuitSpec& spec, double f_hz) {
  spec.validate();
  require(f_hz > 0.0 && std::isfinite(f_hz), "eigenvalue_of_freq: frequency must be positive");
  const double omega = 2.0 * std::numbers::pi * f_hz;
  const double c0 = spec.c0_nf * kNano;
  return 1.0 / (omega * omega * spec.inductance_uh * kMicro * c0) - spec.coupling_sum_f() / c0;
}

ComplexVector drive_response(const CircuitSpec& spec, double omega, int drive_node, double amplitude, double reg) {
  check_node(drive_node, "drive_response");
  ComplexVector current = ComplexVector::Zero(CircuitSpec::node_count);
  current(drive_node - 1) = amplitude;
  return solve_linear(build_laplacian(spec, omega), current, reg);
}

Complex ground_impedance(const CircuitSpec& spec, double omega, int node, double reg) {
  return drive_response(spec, omega, node, 1.0, reg)(node - 1);
}

Complex impedance(const CircuitSpec& spec, double omega, int i, int j, ImpedanceMethod method) {
  check_node(i, "impedance");
  check_node(j, "impedance");
  require(i != j, "impedance: nodes must differ");
  const ComplexMatrix J = build_laplacian(spec, omega);
  const int a = i - 1, b = j - 1;

  if (method == ImpedanceMethod::direct) {
    const ComplexVector gi = drive_response(spec, omega, i);
    const ComplexVector gj = drive_response(spec, omega, j);
    return gi(a) + gj(b) - gj(a) - gi(b);
  }

  const auto eig = eigendecompose(J);
  Eigen::JacobiSVD<ComplexMatrix> svd(J);
  const double scale = svd.singularValues()(0);
  Complex z(0.0, 0.0);
  for (std::size_t mu = 0; mu < eig.eigenvalues.size(); ++mu) {
    const Complex jm = eig.eigenvalues[mu];
    if (std::abs(jm) <= 1e-12 * scale) {
      std::ostringstream os;
      os << "impedance: Laplacian eigenvalue " << jm << " vanishes at f = " << omega / (2 * std::numbers::pi)
         << " Hz (resonance, impedance diverges)";
      fail(ErrorCode::resonance, os.str());
    }
    const auto& r = eig.right_vectors.col(static_cast<Eigen::Index>(mu));
    const auto& l = eig.left_vectors.col(static_cast<Eigen::Index>(mu));
    z += std::conj(l(a) - l(b)) * (r(a) - r(b)) / jm;
  }
  return z;
}

SweepResult sweep(const CircuitSpec& spec, double f_min_hz, double f_max_hz, int points, int drive_node,
                  double peak_threshold) {
  spec.validate();
  require(f_min_hz > 0.0 && f_max_hz > f_min_hz, "sweep: need 0 < f_min < f_max");
  require(points >= 3, "sweep: need at least 3 points");
  require(peak_threshold > 0.0, "sweep: peak threshold must be positive");
  check_node(drive_node, "sweep");

  SweepResult out;
  out.rows.resize(static_cast<std::size_t>(points));
  detail::parallel_for(out.rows.size(), [&](std::size_t k) {
    SweepRow& row = out.rows[k];
    row.frequency_hz = f_min_hz + (f_max_hz - f_min_hz) * static_cast<double>(k) / (points - 1);
    const double omega = 2.0 * std::numbers::pi * row.frequency_hz;
    try {
      row.node_voltages = drive_response(spec, omega, drive_node);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singular) throw;
      // Landed exactly on a lossless resonance: nudge with a tiny ridge.
      const double ridge = 1e-12 * build_laplacian(spec, omega).cwiseAbs().maxCoeff();
      row.node_voltages = drive_response(spec, omega, drive_node, 1.0, ridge);
    }
    row.impedance_ground = row.node_voltages(drive_node - 1);
    row.total_amplitude = row.node_voltages.cwiseAbs().sum();
  });

  std::vector<double> amp;
  amp.reserve(out.rows.size());
  for (const auto& r : out.rows) amp.push_back(r.total_amplitude);
  std::vector<double> sorted = amp;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
    median = 0.5 * (median + lower);
  }
  out.median_amplitude = median;

  for (std::size_t k = 1; k + 1 < amp.size(); ++k) {
    if (amp[k] > amp[k - 1] && amp[k] >= amp[k + 1] && amp[k] > peak_threshold * median) {
      const double f = out.rows[k].frequency_hz;
      out.detected_peaks.push_back({f, eigenvalue_of_freq(spec, f), amp[k]});
    }
  }
  return out;
}

Reconstruction reconstruct_laplacian(const CircuitSpec& spec, double omega, double noise_fraction, std::uint64_t seed) {
  spec.validate();
  check_omega(omega, "reconstruct_laplacian");
  require(std::isfinite(noise_fraction) && noise_fraction >= 0.0 && noise_fraction < 1.0,
          "reconstruct_laplacian: noise fraction must lie in [0, 1)");

  const ComplexMatrix J = build_laplacian(spec, omega);
  constexpr int n = CircuitSpec::node_count;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 gen(seq);
  ComplexMatrix measured(n, n);
  for (int node = 1; node <= n; ++node) {
    ComplexVector v = drive_response(spec, omega, node);
    for (int m = 0; m < n; ++m) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      v(m) *= 1.0 + noise_fraction * (2.0 * u - 1.0);
    }
    measured.col(node - 1) = v;
  }

  Eigen::FullPivLU<ComplexMatrix> lu(measured);
  if (!lu.isInvertible())
    fail(ErrorCode::singular, "reconstruct_laplacian: measured inverse Laplacian is singular");

  Reconstruction out;
  out.laplacian = lu.inverse();
  out.condition_number = largest_over_smallest(J);
  out.near_resonant = out.condition_number > kNearResonantCondition;

  // J = (Y_L + i w Csum) I + i w C0 P'
  const double c0 = spec.c0_nf * kNano;
  const Complex shift = inductor_admittance(spec, omega) + kI * omega * spec.coupling_sum_f();
  ComplexMatrix p = out.laplacian;
  p.diagonal().array() -= shift;
  out.projector = p / (kI * omega * c0);
  return out;
}

}  // namespace ebstates
