#include "ebstates/eb_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "ebstates/error.hpp"
#include "parallel.hpp"

namespace ebstates {

double distance_to_unit_segment(Complex p) {
  if (p.real() < 0.0) return std::abs(p);
  if (p.real() > 1.0) return std::abs(p - 1.0);
  return std::abs(p.imag());
}

EBClassification classify(std::span<const Complex> spectrum, double threshold) {
  require(threshold > 0.0, "classify: threshold must be positive");
  EBClassification out;
  out.threshold = threshold;
  out.is_eb.reserve(spectrum.size());
  for (const Complex p : spectrum) {
    const bool eb = distance_to_unit_segment(p) > threshold;
    out.is_eb.push_back(eb);
    (eb ? out.eb_values : out.normal_values).push_back(p);
  }
  return out;
}

std::vector<Complex> FlowRow::eb_values() const {
  std::vector<Complex> v;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    if (is_eb[i]) v.push_back(eigenvalues[i]);
  return v;
}

FlowTable spectral_flow(const LatticeModel& model, int x_min, int x_max, double threshold) {
  if (x_min < 1 || x_max > model.L || x_min > x_max) {
    std::ostringstream os;
    os << "spectral_flow: range [" << x_min << ", " << x_max << "] not inside [1, " << model.L << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
  require(threshold > 0.0, "spectral_flow: threshold must be positive");

  FlowTable table;
  table.rows.resize(static_cast<std::size_t>(x_max - x_min + 1));
  detail::parallel_for(table.rows.size(), [&](std::size_t i) {
    FlowRow& row = table.rows[i];
    row.x_cut = x_min + static_cast<int>(i);
    try {
      const auto p = build_truncated_projector(model, row.x_cut);
      row.eigenvalues = eigenvalues(p.matrix);
      std::sort(row.eigenvalues.begin(), row.eigenvalues.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      });
      row.is_eb = classify(row.eigenvalues, threshold).is_eb;
    } catch (const Error& e) {
      row.failed = true;
      row.error = e.what();
      row.eigenvalues.clear();
      row.is_eb.clear();
    }
  });
  return table;
}

std::vector<Branch> track_branches(const FlowTable& table) {
  std::vector<Branch> branches;
  std::vector<std::size_t> active;  // indices into branches, alive at the previous row

  for (const FlowRow& row : table.rows) {
    if (row.failed) {
      active.clear();
      continue;
    }
    std::vector<Complex> cand;
    for (const Complex p : row.eb_values())
      if (p.real() > 0.5) cand.push_back(p);

    struct Option {
      double cost;
      std::size_t branch;
      std::size_t cand;
    };
    std::vector<Option> options;
    for (const std::size_t b : active) {
      const auto& v = branches[b].value;
      const Complex predicted = v.size() >= 2 ? 2.0 * v.back() - v[v.size() - 2] : v.back();
      for (std::size_t c = 0; c < cand.size(); ++c)
        options.push_back({std::abs(predicted - cand[c]), b, c});
    }
    std::stable_sort(options.begin(), options.end(),
                     [](const Option& a, const Option& b) { return a.cost < b.cost; });

    std::vector<bool> cand_used(cand.size(), false);
    std::vector<std::size_t> next_active;
    for (const Option& o : options) {
      if (cand_used[o.cand]) continue;
      if (std::find(next_active.begin(), next_active.end(), o.branch) != next_active.end()) continue;
      cand_used[o.cand] = true;
      next_active.push_back(o.branch);
      branches[o.branch].x_cut.push_back(row.x_cut);
      branches[o.branch].value.push_back(cand[o.cand]);
    }
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (cand_used[c]) continue;
      branches.push_back({{row.x_cut}, {cand[c]}});
      next_active.push_back(branches.size() - 1);
    }
    active = std::move(next_active);
  }
  return branches;
}

LambdaOperator lambda_operator(const TruncatedProjector& p) {
  require_square(p.matrix, "lambda_operator");
  LambdaOperator out;
  out.matrix = 4.0 * (p.matrix * p.matrix - p.matrix);
  double off = 0.0;
  for (Eigen::Index j = 0; j < out.matrix.cols(); ++j)
    for (Eigen::Index i = 0; i < out.matrix.rows(); ++i)
      if ((i % 2) != (j % 2)) off += std::norm(out.matrix(i, j));
  out.off_block_norm = std::sqrt(off);
  return out;
}

double estimate_lambda_eb(const LatticeModel& model, int x_cut, LambdaEstimate mode) {
  if (x_cut < 1 || x_cut > model.L) {
    std::ostringstream os;
    os << "estimate_lambda_eb: x_cut = " << x_cut << " outside [1, " << model.L << "]";
    fail(ErrorCode::invalid_argument, os.str());
  }
  if (mode == LambdaEstimate::linear) {
    require(model.B >= 2, "estimate_lambda_eb: linear mode assumes B >= 2");
    return u_coefficient(model, 0) * d_coefficient(model, 0) * x_cut;
  }

  // Offsets reach 2 (x_cut - 1); coefficients are even in the offset.
  const int reach = 2 * (x_cut - 1);
  std::vector<double> u(static_cast<std::size_t>(reach + 1));
  std::vector<double> d(static_cast<std::size_t>(reach + 1));
  for (int off = 0; off <= reach; ++off) {
    u[off] = u_coefficient(model, off);
    d[off] = d_coefficient(model, off);
  }
  auto U = [&](int off) { return u[static_cast<std::size_t>(std::abs(off))]; };
  auto D = [&](int off) { return d[static_cast<std::size_t>(std::abs(off))]; };

  double numerator = 0.0;
  double denominator = 0.0;
  for (int x = 0; x < x_cut; ++x) {
    denominator += D(x) * U(-x);
    for (int xp = 0; xp < x_cut; ++xp)
      for (int xpp = 0; xpp < x_cut; ++xpp) numerator += D(x) * U(-xp) * D(xp + xpp) * U(-(x + xpp));
  }
  if (std::abs(denominator) < 1e-300 || !std::isfinite(numerator / denominator)) {
    std::ostringstream os;
    os << "estimate_lambda_eb: denominator sum vanishes (" << denominator << ")";
    fail(ErrorCode::singular, os.str());
  }
  return -numerator / denominator;
}

LinearFit least_squares(const std::vector<std::vector<double>>& basis, std::span<const double> y) {
  require(!basis.empty(), "least_squares: empty basis");
  const auto n = static_cast<Eigen::Index>(y.size());
  require(n > static_cast<Eigen::Index>(basis.size()), "least_squares: need more samples than basis functions");
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    require(static_cast<Eigen::Index>(basis[j].size()) == n, "least_squares: basis length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) A(i, static_cast<Eigen::Index>(j)) = basis[j][i];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(yv);
  const Eigen::VectorXd res = yv - A * c;
  const double ss_res = res.squaredNorm();
  const double ss_tot = (yv.array() - yv.mean()).matrix().squaredNorm();
  LinearFit out;
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return out;
}

ScalingFit fit_scaling(std::span<const std::pair<double, double>> samples) {
  require(samples.size() >= 3, "fit_scaling: need at least 3 samples");
  std::vector<double> one, logl, logp;
  for (const auto& [L, p] : samples) {
    if (!(L > 0.0) || !(p > 1.0) || !std::isfinite(p)) {
      std::ostringstream os;
      os << "fit_scaling: sample (L=" << L << ", p=" << p << ") needs L > 0 and p > 1";
      fail(ErrorCode::invalid_argument, os.str());
    }
    one.push_back(1.0);
    logl.push_back(std::log(L));
    logp.push_back(std::log(p - 0.5));
  }
  const auto fit = least_squares({one, logl}, logp);
  ScalingFit out;
  out.prefactor = std::exp(fit.coefficients[0]);
  out.exponent = fit.coefficients[1];
  out.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
  out.samples.assign(samples.begin(), samples.end());
  return out;
}

Entropy entanglement_entropy(std::span<const Complex> spectrum) {
  auto xlogx = [](Complex z) { return z == Complex(0.0, 0.0) ? Complex(0.0, 0.0) : z * std::log(z); };
  Complex s(0.0, 0.0);
  for (const Complex p : spectrum) s -= xlogx(p) + xlogx(1.0 - p);
  return {s.real(), std::abs(s.imag())};
}

}  // namespace ebstates
