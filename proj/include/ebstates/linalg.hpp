#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ebstates {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-8;

/// Right and left eigenvectors of a general square matrix, stored as columns
/// and paired index-by-index with `eigenvalues`.
///
/// Convention: every right vector has unit 2-norm and its left partner is
/// scaled so that l^H r = 1. Inside a cluster of (numerically) degenerate
/// eigenvalues the left vectors are re-mixed so that the block L^H R is the
/// identity. When that is impossible because the cluster is defective, the
/// vectors are returned as found and `biortho_error` is large.
struct EigenDecomposition {
  std::vector<Complex> eigenvalues;
  ComplexMatrix right_vectors;
  ComplexMatrix left_vectors;
  std::vector<double> residual_norms;       // ||A r - lambda r|| (unit r)
  std::vector<double> left_residual_norms;  // ||A^H l - conj(lambda) l|| (unit l)
  double biortho_error = 0.0;               // max |L^H R - I|
};

struct DefectivenessReport {
  Complex eigenvalue;
  std::size_t algebraic_multiplicity = 0;
  std::size_t geometric_multiplicity = 0;
  bool is_defective = false;
};

void require_square(const ComplexMatrix& a, std::string_view what);
void require_finite(const ComplexMatrix& a, std::string_view what);

/// Diagonal similarity D such that D^{-1} A D has rows and columns of
/// comparable norm (radix-2 scaling, so it introduces no rounding).
Eigen::VectorXd balance_scaling(const ComplexMatrix& a);

/// Eigenvalues only; cheaper than the full decomposition.
std::vector<Complex> eigenvalues(const ComplexMatrix& a);

EigenDecomposition eigendecompose(const ComplexMatrix& a, double tol = kDefaultTol);

/// Solves (A + reg I) x = b. With reg = 0 an exactly singular A is an error.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b, double reg = 0.0);

DefectivenessReport defectiveness(const ComplexMatrix& a, Complex lambda, double tol = kDefaultTol);

/// Groups values into clusters whose members are chained by distance <= tol.
/// Returns a cluster id per value; ids are dense and ordered by first member.
std::vector<std::size_t> cluster_values(std::span<const Complex> values, double tol);

}  // namespace ebstates
