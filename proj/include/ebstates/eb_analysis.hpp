#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ebstates/linalg.hpp"
#include "ebstates/model.hpp"

namespace ebstates {

inline constexpr double kDefaultEbThreshold = 0.1;

/// Euclidean distance from p to the real segment [0, 1].
double distance_to_unit_segment(Complex p);

struct EBClassification {
  std::vector<Complex> eb_values;
  std::vector<Complex> normal_values;
  std::vector<bool> is_eb;  // aligned with the classified spectrum
  double threshold = kDefaultEbThreshold;
};

EBClassification classify(std::span<const Complex> spectrum, double threshold = kDefaultEbThreshold);

struct FlowRow {
  int x_cut = 0;
  std::vector<Complex> eigenvalues;
  std::vector<bool> is_eb;
  bool failed = false;
  std::string error;

  std::vector<Complex> eb_values() const;
};

struct FlowTable {
  std::vector<FlowRow> rows;
};

/// Spectrum of the truncated projector for every x_cut in [x_min, x_max].
/// A row whose eigensolve fails is flagged; the sweep carries on.
FlowTable spectral_flow(const LatticeModel& model, int x_min, int x_max,
                        double threshold = kDefaultEbThreshold);

/// One EB branch followed across consecutive x_cut rows.
struct Branch {
  std::vector<int> x_cut;
  std::vector<Complex> value;
};

/// Follows the EB values with Re p > 1/2 (their partners 1 - p carry no
/// extra information) through the table. Matching uses linear extrapolation
/// from the last two points of each branch, so branches pass through
/// crossings instead of swapping.
std::vector<Branch> track_branches(const FlowTable& table);

struct LambdaOperator {
  ComplexMatrix matrix;        // 4 (P^2 - P), same index order as P
  double off_block_norm = 0.0; // Frobenius norm of the up/down mixing blocks
};

LambdaOperator lambda_operator(const TruncatedProjector& p);

enum class LambdaEstimate { full, linear };

/// Closed-form estimates of the growing EB eigenvalue of the Lambda operator.
/// `full` evaluates the triple-sum ratio over the kept window, `linear` the
/// leading term U_0 D_0 x_cut.
double estimate_lambda_eb(const LatticeModel& model, int x_cut, LambdaEstimate mode);

struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> samples;
};

/// Log-log least squares of (p_eb - 1/2) against L.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> samples);

struct LinearFit {
  std::vector<double> coefficients;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ sum_j c_j basis_j (no implicit intercept).
/// R^2 is 1 - SS_res / SS_tot with SS_tot about the mean of y, so a poor
/// basis can give a negative value.
LinearFit least_squares(const std::vector<std::vector<double>>& basis, std::span<const double> y);

struct Entropy {
  double real = 0.0;
  double imag_remnant = 0.0;
};

/// S = -sum [p ln p + (1-p) ln(1-p)] on the principal branch, with
/// p ln p -> 0 at p = 0. Occupations outside [0, 1] leave an imaginary part,
/// which is reported rather than dropped.
Entropy entanglement_entropy(std::span<const Complex> spectrum);

}  // namespace ebstates
