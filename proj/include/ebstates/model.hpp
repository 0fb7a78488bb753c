#pragma once

#include <functional>
#include <vector>

#include "ebstates/linalg.hpp"

namespace ebstates {

/// Two-band lattice model H(k) = [[0, a0 + h(k)], [h(k), 0]] on L unit cells,
/// h(k) = (2(1 - cos k))^B / 2. At k = 0 it is a 2x2 Jordan block.
struct LatticeModel {
  double a0 = 1.0;
  int B = 1;
  int L = 2;
  std::vector<double> grid;  // momenta, radians

  /// Validates the parameters and attaches the half-integer momentum grid.
  static LatticeModel create(double a0, int B, int L);
};

/// Projector P restricted to cells [1, x_cut]. Row/column 2(x-1)+s holds
/// cell x and sublattice s (0 = up, 1 = down).
struct TruncatedProjector {
  ComplexMatrix matrix;
  int x_cut = 0;
  double a0 = 0.0;
  int B = 0;
  int L = 0;
};

/// Fourier coefficients of the off-diagonal symbol entries over x = 0..L-1.
/// The grid is anti-periodic, so U_{x+L} = -U_x.
struct TwoPointTable {
  std::vector<double> U;
  std::vector<double> D;
};

double eval_h(double k, int B);

/// k_m = (2m + 1) pi / L, m = 0..L-1. Never hits k = 0.
std::vector<double> momentum_grid(int L);

ComplexMatrix hamiltonian(double k, const LatticeModel& model);

/// U(k) = sqrt((a0 + h) / h); D(k) = 1 / U(k).
double symbol_u(double k, const LatticeModel& model);

/// Closed form 1/2 [[1, -U], [-D, 1]].
ComplexMatrix projector_symbol(double k, const LatticeModel& model);

/// Same symbol built from the biorthogonal eigenpair of the negative band.
ComplexMatrix projector_symbol_numeric(double k, const LatticeModel& model, double tol = kDefaultTol);

/// U_x and D_x for an arbitrary (possibly negative or >= L) offset.
double u_coefficient(const LatticeModel& model, long x);
double d_coefficient(const LatticeModel& model, long x);

TwoPointTable two_point_functions(const LatticeModel& model);

TruncatedProjector build_truncated_projector(const LatticeModel& model, int x_cut);

using SymbolFunction = std::function<ComplexMatrix(double)>;

/// Generic real-space restriction of a 2x2 symbol: block (x', x) is
/// (1/L) sum_k e^{ik(x'-x)} P(k), for x, x' in [1, x_cut].
ComplexMatrix restrict_symbol(const SymbolFunction& symbol, const std::vector<double>& grid,
                              int x_cut);

}  // namespace ebstates
