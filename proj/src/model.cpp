#include "ebstates/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "ebstates/error.hpp"
#include "pairwise.hpp"

namespace ebstates {

namespace {

void check_model(const LatticeModel& m) {
  require(std::isfinite(m.a0) && m.a0 > 0.0, "model: a0 must be a positive finite number");
  require(m.B >= 1, "model: B must be a positive integer");
  require(m.L >= 2, "model: L must be at least 2");
  require(static_cast<int>(m.grid.size()) == m.L, "model: grid must hold exactly L momenta");
}

// e^{i k_m x} on the half-integer grid, reduced exactly before the trig call.
Complex grid_phase(int m, long x, int L) {
  const long period = 2L * L;
  long n = ((2L * m + 1) * (x % period)) % period;
  if (n < 0) n += period;
  return std::polar(1.0, std::numbers::pi * static_cast<double>(n) / L);
}

double real_coefficient(const LatticeModel& model, long x, bool upper) {
  check_model(model);
  std::vector<Complex> terms(static_cast<std::size_t>(model.L));
  double magnitude = 0.0;
  for (int m = 0; m < model.L; ++m) {
    const double u = symbol_u(model.grid[m], model);
    const double value = upper ? u : 1.0 / u;
    magnitude += value;
    terms[m] = grid_phase(m, x, model.L) * value;
  }
  const Complex sum = detail::pairwise_sum<Complex>(terms) / static_cast<double>(model.L);
  const double dust_limit = 1e-10 * std::max(1.0, magnitude / model.L);
  if (std::abs(sum.imag()) > dust_limit) {
    std::ostringstream os;
    os << "two-point coefficient at x=" << x << " has imaginary part " << sum.imag();
    fail(ErrorCode::invalid_argument, os.str());
  }
  return sum.real();
}

}  // namespace

LatticeModel LatticeModel::create(double a0, int B, int L) {
  require(L >= 2, "model: L must be at least 2");
  LatticeModel m{a0, B, L, momentum_grid(L)};
  check_model(m);
  return m;
}

double eval_h(double k, int B) {
  const double s = std::sin(0.5 * k);
  return 0.5 * std::pow(4.0 * s * s, B);
}

std::vector<double> momentum_grid(int L) {
  require(L >= 2, "momentum_grid: L must be at least 2");
  std::vector<double> k(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) k[m] = (2.0 * m + 1.0) * std::numbers::pi / L;
  return k;
}

ComplexMatrix hamiltonian(double k, const LatticeModel& model) {
  const double h = eval_h(k, model.B);
  ComplexMatrix H(2, 2);
  H << 0.0, model.a0 + h, h, 0.0;
  return H;
}

double symbol_u(double k, const LatticeModel& model) {
  const double h = eval_h(k, model.B);
  if (!(h > 0.0)) {
    std::ostringstream os;
    os << "projector symbol: h(k) = 0 at k = " << k << " (exceptional point, H is a Jordan block)";
    fail(ErrorCode::defective_point, os.str());
  }
  return std::sqrt((model.a0 + h) / h);
}

ComplexMatrix projector_symbol(double k, const LatticeModel& model) {
  const double u = symbol_u(k, model);
  ComplexMatrix P(2, 2);
  P << 0.5, -0.5 * u, -0.5 / u, 0.5;
  return P;
}

ComplexMatrix projector_symbol_numeric(double k, const LatticeModel& model, double tol) {
  if (!(eval_h(k, model.B) > 0.0)) {
    std::ostringstream os;
    os << "projector symbol: H(k) is defective at k = " << k;
    fail(ErrorCode::defective_point, os.str());
  }
  const auto eig = eigendecompose(hamiltonian(k, model), tol);
  int occupied = -1;
  for (int i = 0; i < 2; ++i) {
    const double re = eig.eigenvalues[i].real();
    if (std::abs(re) < tol)
      fail(ErrorCode::ambiguous, "projector symbol: band energy has |Re e| below tolerance");
    if (re < 0.0) {
      if (occupied >= 0) fail(ErrorCode::ambiguous, "projector symbol: both bands have Re e < 0");
      occupied = i;
    }
  }
  if (occupied < 0) fail(ErrorCode::ambiguous, "projector symbol: no band with Re e < 0");
  return eig.right_vectors.col(occupied) * eig.left_vectors.col(occupied).adjoint();
}

double u_coefficient(const LatticeModel& model, long x) { return real_coefficient(model, x, true); }
double d_coefficient(const LatticeModel& model, long x) { return real_coefficient(model, x, false); }

TwoPointTable two_point_functions(const LatticeModel& model) {
  TwoPointTable t;
  t.U.resize(static_cast<std::size_t>(model.L));
  t.D.resize(static_cast<std::size_t>(model.L));
  for (int x = 0; x < model.L; ++x) {
    t.U[x] = u_coefficient(model, x);
    t.D[x] = d_coefficient(model, x);
  }
  return t;
}

TruncatedProjector build_truncated_projector(const LatticeModel& model, int x_cut) {
  check_model(model);
  if (x_cut < 1 || x_cut > model.L) {
    std::ostringstream os;
    os << "build_truncated_projector: x_cut = " << x_cut << " outside [1, " << model.L << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
  // The grid is symmetric under k -> -k, so U_{-d} = U_d.
  std::vector<double> u(static_cast<std::size_t>(x_cut));
  std::vector<double> d(static_cast<std::size_t>(x_cut));
  for (int off = 0; off < x_cut; ++off) {
    u[off] = u_coefficient(model, off);
    d[off] = d_coefficient(model, off);
  }

  const int n = 2 * x_cut;
  ComplexMatrix P = ComplexMatrix::Zero(n, n);
  for (int xp = 0; xp < x_cut; ++xp) {
    for (int x = 0; x < x_cut; ++x) {
      const int off = std::abs(xp - x);
      if (xp == x) {
        P(2 * xp, 2 * x) = 0.5;
        P(2 * xp + 1, 2 * x + 1) = 0.5;
      }
      P(2 * xp, 2 * x + 1) = -0.5 * u[off];
      P(2 * xp + 1, 2 * x) = -0.5 * d[off];
    }
  }
  return {std::move(P), x_cut, model.a0, model.B, model.L};
}

ComplexMatrix restrict_symbol(const SymbolFunction& symbol, const std::vector<double>& grid,
                              int x_cut) {
  require(!grid.empty(), "restrict_symbol: empty momentum grid");
  require(x_cut >= 1, "restrict_symbol: x_cut must be positive");
  const auto nk = grid.size();
  std::vector<ComplexMatrix> sym;
  sym.reserve(nk);
  for (double k : grid) {
    sym.push_back(symbol(k));
    require(sym.back().rows() == 2 && sym.back().cols() == 2, "restrict_symbol: symbol must be 2x2");
  }

  // One 2x2 block per offset x' - x in [-(x_cut-1), x_cut-1].
  std::vector<ComplexMatrix> blocks;
  std::vector<Complex> terms(nk);
  for (int off = -(x_cut - 1); off <= x_cut - 1; ++off) {
    ComplexMatrix blk(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        for (std::size_t m = 0; m < nk; ++m) terms[m] = std::polar(1.0, grid[m] * off) * sym[m](a, b);
        blk(a, b) = detail::pairwise_sum<Complex>(terms) / static_cast<double>(nk);
      }
    blocks.push_back(std::move(blk));
  }

  const int n = 2 * x_cut;
  ComplexMatrix P(n, n);
  for (int xp = 0; xp < x_cut; ++xp)
    for (int x = 0; x < x_cut; ++x)
      P.block(2 * xp, 2 * x, 2, 2) = blocks[static_cast<std::size_t>(xp - x + x_cut - 1)];
  return P;
}

}  // namespace ebstates
