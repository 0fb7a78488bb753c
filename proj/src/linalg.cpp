#include "ebstates/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "ebstates/error.hpp"

namespace ebstates {

namespace {

double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

ComplexMatrix apply_balance(const ComplexMatrix& a, const Eigen::VectorXd& d) {
  // D^{-1} A D
  ComplexMatrix b = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) b(i, j) *= d(j) / d(i);
  return b;
}

double largest_singular_value(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

// Greedy assignment of left eigenvalues (already conjugated) to right ones,
// cheapest pairs first.
std::vector<Eigen::Index> pair_by_eigenvalue(const std::vector<Complex>& right,
                                             const std::vector<Complex>& left_conj) {
  const auto n = static_cast<Eigen::Index>(right.size());
  std::vector<std::pair<double, std::pair<Eigen::Index, Eigen::Index>>> cost;
  cost.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost.push_back({std::abs(right[i] - left_conj[j]), {i, j}});
  std::stable_sort(cost.begin(), cost.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Eigen::Index> match(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Eigen::Index assigned = 0;
  for (const auto& [c, ij] : cost) {
    const auto [i, j] = ij;
    if (match[i] >= 0 || used[j]) continue;
    match[i] = j;
    used[j] = true;
    if (++assigned == n) break;
  }
  return match;
}

}  // namespace

void require_square(const ComplexMatrix& a, std::string_view what) {
  if (a.rows() < 1 || a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
    fail(ErrorCode::invalid_argument, os.str());
  }
}

void require_finite(const ComplexMatrix& a, std::string_view what) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i + 1 << "," << j + 1 << ")";
        fail(ErrorCode::invalid_argument, os.str());
      }
}

Eigen::VectorXd balance_scaling(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  ComplexMatrix b = a;
  constexpr double radix = 2.0;
  bool converged = false;
  for (int sweep = 0; !converged && sweep < 100; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += abs1(b(j, i));
        r += abs1(b(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        d(i) *= f;
        b.row(i) /= f;
        b.col(i) *= f;
      }
    }
  }
  return d;
}

std::vector<Complex> eigenvalues(const ComplexMatrix& a) {
  require_square(a, "eigenvalues");
  require_finite(a, "eigenvalues");
  const ComplexMatrix b = apply_balance(a, balance_scaling(a));
  Eigen::ComplexEigenSolver<ComplexMatrix> es(b, false);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::no_convergence, "eigenvalues: shifted QR did not converge within " +
                                        std::to_string(30 * a.rows()) + " iterations");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<std::size_t> cluster_values(std::span<const Complex> values, double tol) {
  const std::size_t n = values.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= tol) parent[find(j)] = find(i);

  std::vector<std::size_t> id(n);
  std::vector<std::size_t> root_to_id(n, n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_to_id[r] == n) root_to_id[r] = next++;
    id[i] = root_to_id[r];
  }
  return id;
}

EigenDecomposition eigendecompose(const ComplexMatrix& a, double tol) {
  require_square(a, "eigendecompose");
  require_finite(a, "eigendecompose");
  require(tol > 0.0, "eigendecompose: tol must be positive");
  const Eigen::Index n = a.rows();

  const Eigen::VectorXd d = balance_scaling(a);
  const ComplexMatrix b = apply_balance(a, d);

  Eigen::ComplexEigenSolver<ComplexMatrix> right(b, true);
  Eigen::ComplexEigenSolver<ComplexMatrix> left(b.adjoint(), true);
  if (right.info() != Eigen::Success || left.info() != Eigen::Success)
    fail(ErrorCode::no_convergence, "eigendecompose: shifted QR did not converge within " +
                                        std::to_string(30 * n) + " iterations");

  EigenDecomposition out;
  out.eigenvalues.assign(right.eigenvalues().data(), right.eigenvalues().data() + n);

  // Undo the balancing: r = D r_b, l = D^{-1} l_b.
  ComplexMatrix r = d.asDiagonal() * right.eigenvectors();
  ComplexMatrix l_unpaired = d.cwiseInverse().asDiagonal() * left.eigenvectors();

  std::vector<Complex> left_conj(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) left_conj[j] = std::conj(left.eigenvalues()(j));
  const auto match = pair_by_eigenvalue(out.eigenvalues, left_conj);

  ComplexMatrix l(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.col(i).normalize();
    l.col(i) = l_unpaired.col(match[i]).normalized();
  }

  const double scale = std::max(1.0, largest_singular_value(a));
  const auto cluster = cluster_values(out.eigenvalues, tol * scale);
  const std::size_t n_clusters =
      cluster.empty() ? 0 : *std::max_element(cluster.begin(), cluster.end()) + 1;

  for (std::size_t c = 0; c < n_clusters; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (cluster[i] == c) members.push_back(i);
    const auto k = static_cast<Eigen::Index>(members.size());
    ComplexMatrix rc(n, k), lc(n, k);
    for (Eigen::Index m = 0; m < k; ++m) {
      rc.col(m) = r.col(members[m]);
      lc.col(m) = l.col(members[m]);
    }
    const ComplexMatrix gram = lc.adjoint() * rc;
    Eigen::JacobiSVD<ComplexMatrix> svd(gram);
    const auto& sv = svd.singularValues();
    // A defective cluster shows up as (nearly) parallel right vectors; the
    // Gram matrix alone can look fine because the solver perturbs them apart.
    Eigen::JacobiSVD<ComplexMatrix> rsvd(rc);
    const bool independent = rsvd.singularValues()(k - 1) > tol;
    if (independent && sv(k - 1) > tol * std::max(sv(0), 1e-300)) {
      lc = lc * gram.inverse().adjoint();
    } else {
      // Defective cluster: fall back to per-pair scaling where possible.
      for (Eigen::Index m = 0; m < k; ++m) {
        const Complex overlap = lc.col(m).dot(rc.col(m));
        if (std::abs(overlap) > 1e-300) lc.col(m) /= std::conj(overlap);
      }
    }
    for (Eigen::Index m = 0; m < k; ++m) l.col(members[m]) = lc.col(m);
  }

  out.right_vectors = std::move(r);
  out.left_vectors = std::move(l);

  const ComplexMatrix overlap = out.left_vectors.adjoint() * out.right_vectors;
  out.biortho_error = (overlap - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();

  out.residual_norms.resize(static_cast<std::size_t>(n));
  out.left_residual_norms.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = out.eigenvalues[i];
    const ComplexVector& ri = out.right_vectors.col(i);
    out.residual_norms[i] = (a * ri - lambda * ri).norm();
    const ComplexVector li = out.left_vectors.col(i).normalized();
    out.left_residual_norms[i] = (a.adjoint() * li - std::conj(lambda) * li).norm();
  }
  return out;
}

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b, double reg) {
  require_square(a, "solve_linear");
  require_finite(a, "solve_linear");
  require(b.size() == a.rows(), "solve_linear: right-hand side length does not match matrix");
  require(reg >= 0.0 && std::isfinite(reg), "solve_linear: reg must be a finite non-negative number");
  ComplexMatrix m = a;
  if (reg > 0.0) m.diagonal().array() += reg;
  Eigen::FullPivLU<ComplexMatrix> lu(m);
  if (!lu.isInvertible())
    fail(ErrorCode::singular, "solve_linear: matrix is singular (rank " + std::to_string(lu.rank()) +
                                  " of " + std::to_string(a.rows()) + ")");
  return lu.solve(b);
}

DefectivenessReport defectiveness(const ComplexMatrix& a, Complex lambda, double tol) {
  require_square(a, "defectiveness");
  require(tol > 0.0, "defectiveness: tol must be positive");
  const auto ev = eigenvalues(a);
  const double scale = std::max(1.0, largest_singular_value(a));
  const double radius = tol * scale;

  std::size_t nearest = 0;
  for (std::size_t i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i] - lambda) < std::abs(ev[nearest] - lambda)) nearest = i;
  if (std::abs(ev[nearest] - lambda) > radius) {
    std::ostringstream os;
    os << "defectiveness: " << lambda << " is not an eigenvalue (nearest " << ev[nearest] << ")";
    fail(ErrorCode::invalid_argument, os.str());
  }
  // The query point joins the cluster so that eigenvalues straddling it count.
  std::vector<Complex> pts = ev;
  pts.push_back(lambda);
  const auto cluster = cluster_values(pts, radius);
  const std::size_t target = cluster.back();
  const auto algebraic = static_cast<std::size_t>(
      std::count(cluster.begin(), cluster.end() - 1, target));

  ComplexMatrix shifted = a;
  shifted.diagonal().array() -= lambda;
  Eigen::JacobiSVD<ComplexMatrix> svd(shifted);
  const auto& sv = svd.singularValues();
  std::size_t nullity = 0;
  const double cut = tol * sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) ++nullity;
  nullity = std::clamp<std::size_t>(nullity, 1, algebraic);

  return {lambda, algebraic, nullity, nullity < algebraic};
}

}  // namespace ebstates
