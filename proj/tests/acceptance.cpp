// Acceptance run: one PASS/FAIL line per criterion, with the measured
// quantities alongside. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ebstates/circuit.hpp"
#include "ebstates/disorder.hpp"
#include "ebstates/eb_analysis.hpp"
#include "ebstates/linalg.hpp"
#include "ebstates/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ebstates;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Collects sub-checks for one criterion and the numbers behind them.
class Criterion {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failed_.push_back(what);
    }
  }
  void note(const char* fmt, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, v);
    if (!notes_.empty()) notes_ += "; ";
    notes_ += buf;
  }
  bool pass() const { return pass_; }
  std::string detail() const {
    std::string s = notes_;
    for (const auto& f : failed_) s += (s.empty() ? "" : "; ") + std::string("failed: ") + f;
    return s;
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failed_;
  std::string notes_;
};

double nearest(const std::vector<Complex>& set, Complex z) {
  double best = INFINITY;
  for (const auto w : set) best = std::min(best, std::abs(w - z));
  return best;
}

double nearest(const std::vector<double>& set, double v) {
  double best = INFINITY;
  for (const auto w : set) best = std::min(best, std::abs(w - v));
  return best;
}

std::vector<Complex> eb_values_at(const LatticeModel& m, int x_cut) {
  return classify(eigenvalues(build_truncated_projector(m, x_cut).matrix)).eb_values;
}

void published_matrix(Criterion& c) {
  const auto p = build_truncated_projector(LatticeModel::create(14.0, 7, 4), 3).matrix;
  // Blocks depend only on the cell distance; distance 2 vanishes because
  // U and D are odd under x -> L - x on this grid.
  const double up[3] = {-8.8529, -5.9055, 0.0};
  const double dn[3] = {-0.2566, 0.1712, 0.0};
  double worst = 0.0;
  for (int xr = 0; xr < 3; ++xr)
    for (int xc = 0; xc < 3; ++xc) {
      const int d = std::abs(xr - xc);
      const double block[2][2] = {{d == 0 ? 0.5 : 0.0, up[d]}, {dn[d], d == 0 ? 0.5 : 0.0}};
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t)
          worst = std::max(worst, std::abs(p(2 * xr + s, 2 * xc + t) - block[s][t]));
    }
  c.note("max |entry - published| = %.2e", worst);
  c.expect(worst <= 2e-3, "entrywise match within 2e-3");
}

void exact_eb_eigenvalues(Criterion& c) {
  const auto ev = eigenvalues(build_truncated_projector(LatticeModel::create(14.0, 7, 4), 3).matrix);
  const double e_hi = nearest(ev, 2.0073);
  const double e_lo = nearest(ev, -1.0073);
  c.note("|p - 2.0073| = %.1e", e_hi);
  c.note("|p + 1.0073| = %.1e", e_lo);
  c.expect(e_hi <= 2e-3 && e_lo <= 2e-3, "EB pair within 2e-3");
  int near0 = 0;
  int near1 = 0;
  for (const auto z : ev) {
    near0 += std::abs(z) <= 1e-3;
    near1 += std::abs(z - 1.0) <= 1e-3;
  }
  c.note("values near 0: %.0f", near0);
  c.note("near 1: %.0f", near1);
  c.expect(near0 == 2 && near1 == 2, "two pairs at {0, 1} within 1e-3");
}

std::vector<double> circuit_projector_values() {
  return testutil::sorted_real(eigenvalues(effective_projector(CircuitSpec{})));
}

void circuit_spectrum(Criterion& c) {
  const auto ev = eigenvalues(effective_projector(CircuitSpec{}));
  double worst = 0.0;
  double imag = 0.0;
  for (const double target : {1.987, -0.987, 0.991, 0.906, 0.094, 0.009}) worst = std::max(worst, nearest(ev, target));
  for (const auto z : ev) imag = std::max(imag, std::abs(z.imag()));
  c.note("max deviation = %.1e", worst);
  c.note("max |Im| = %.1e", imag);
  c.expect(worst <= 1e-3 && imag <= 1e-3, "six eigenvalues within 1e-3");
}

void resonance_frequencies(Criterion& c) {
  const CircuitSpec spec;
  const auto ev = circuit_projector_values();  // ascending p, so descending f
  const double expected_khz[6] = {358.8, 350.0, 349.3, 342.6, 342.0, 334.3};
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    worst = std::max(worst, std::abs(freq_of_eigenvalue(spec, ev[i]) / 1e3 - expected_khz[i]));
  c.note("max |f - expected| = %.3f kHz", worst);
  c.expect(worst <= 0.5, "mapped frequencies within 0.5 kHz");
}

void sweep_realism(Criterion& c) {
  CircuitSpec spec;
  spec.esr_ohm = 0.2;
  std::vector<double> mapped;
  for (const double p : circuit_projector_values()) mapped.push_back(freq_of_eigenvalue(spec, p));
  const auto r = sweep(spec, 310e3, 400e3, 2000, 2);
  c.note("detected peaks: %.0f", static_cast<double>(r.detected_peaks.size()));
  double worst = 0.0;
  std::vector<double> found;
  for (const auto& pk : r.detected_peaks) {
    found.push_back(pk.frequency_hz);
    worst = std::max(worst, nearest(mapped, pk.frequency_hz) / pk.frequency_hz);
  }
  c.note("max relative offset = %.2e", worst);
  c.expect(!found.empty() && worst <= 0.01, "every peak within 1% of a mapped frequency");
  // The two EB resonances sit at the extreme eigenvalues.
  const double eb_lo = mapped.back();
  const double eb_hi = mapped.front();
  c.expect(nearest(found, eb_lo) <= 0.01 * eb_lo && nearest(found, eb_hi) <= 0.01 * eb_hi,
           "both EB resonances detected");
}

void eb_profiles(Criterion& c) {
  const CircuitSpec spec;  // lossless; a tiny ridge keeps the solve finite at resonance
  const auto eig = eigendecompose(effective_projector(spec));
  std::vector<Eigen::VectorXd> measured;
  double worst = 0.0;
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    const double pk = eig.eigenvalues[k].real();
    if (distance_to_unit_segment(eig.eigenvalues[k]) <= kDefaultEbThreshold) continue;
    Eigen::VectorXd expect = eig.right_vectors.col(static_cast<Eigen::Index>(k)).cwiseAbs();
    expect /= expect.maxCoeff();
    Eigen::VectorXd got = drive_response(spec, kTwoPi * freq_of_eigenvalue(spec, pk), 2, 1.0, 1e-12).cwiseAbs();
    got /= got.maxCoeff();
    worst = std::max(worst, (got - expect).cwiseAbs().maxCoeff());
    measured.push_back(got);
  }
  c.expect(measured.size() == 2, "two EB resonances");
  c.note("max per-node deviation = %.1e", worst);
  c.expect(worst <= 0.05, "profiles within 5% per node");
  if (measured.size() == 2) {
    const double between = (measured[0] - measured[1]).cwiseAbs().maxCoeff();
    c.note("profile mismatch between EB resonances = %.1e", between);
    c.expect(between <= 0.05, "the two EB profiles coincide");
  }
}

void spectral_flow_check(Criterion& c) {
  const auto model = LatticeModel::create(1.0, 3, 50);
  const auto flow = spectral_flow(model, 1, 50);
  bool counts = true;
  double pairing = 0.0;
  for (const auto& row : flow.rows) {
    const auto eb = row.eb_values();
    const std::size_t want = (row.x_cut == 1 || row.x_cut == 49) ? 2 : (row.x_cut == 50 ? 0 : 4);
    counts = counts && !row.failed && eb.size() == want;
    for (const auto p : eb) pairing = std::max(pairing, nearest(row.eigenvalues, 1.0 - p));
  }
  c.expect(counts, "two EB branches (four values) for 2 <= x_cut <= L-2");

  // Branches meet at the midpoint.
  std::vector<double> upper;
  for (const auto z : flow.rows[24].eb_values())
    if (z.real() > 0.5) upper.push_back(z.real());
  const double split = upper.size() == 2 ? std::abs(upper[0] - upper[1]) : INFINITY;
  c.note("branch split at x_cut=25: %.1e", split);
  c.expect(split <= 1e-6, "branches cross at x_cut = 25");

  double full = 0.0;
  for (const auto z : flow.rows[49].eigenvalues) full = std::max(full, std::min(std::abs(z), std::abs(z - 1.0)));
  c.note("x_cut=L distance to {0,1}: %.1e", full);
  c.expect(full <= 1e-9, "x_cut = L spectrum in {0, 1}");

  double lambda_sym = 0.0;
  for (int x = 1; x < 25; ++x) {
    auto a = eigenvalues(lambda_operator(build_truncated_projector(model, x)).matrix);
    auto b = eigenvalues(lambda_operator(build_truncated_projector(model, 50 - x)).matrix);
    a.resize(b.size(), Complex(0.0));  // the larger window only adds zero modes
    lambda_sym = std::max(lambda_sym, oracle::multiset_distance(a, b));
  }
  c.note("Lambda symmetry error = %.1e", lambda_sym);
  c.expect(lambda_sym <= 1e-6, "Lambda spectrum symmetric under x_cut <-> L - x_cut");
  c.note("EB pairing error = %.1e", pairing);
  c.expect(pairing <= 1e-6, "EB pairing p <-> 1 - p");
}

void duality(Criterion& c) {
  for (const auto& m : {LatticeModel::create(14.0, 7, 4), LatticeModel::create(1.0, 3, 40)}) {
    const auto a = eb_values_at(m, 1);
    const auto b = eb_values_at(m, m.L - 1);
    const double d = a.size() == b.size() && !a.empty() ? oracle::multiset_distance(a, b) : INFINITY;
    c.note(m.B == 7 ? "(14,7,4): %.1e" : "(1,3,40): %.1e", d);
    c.expect(d <= 1e-6, "duality for B=" + std::to_string(m.B));
  }
}

double largest_eb(const LatticeModel& m, int x_cut) {
  double best = -INFINITY;
  for (const auto z : eb_values_at(m, x_cut)) best = std::max(best, z.real());
  return best;
}

void scaling_law(Criterion& c) {
  for (const int B : {2, 3}) {
    std::vector<std::pair<double, double>> samples;
    for (const int L : {32, 64, 128}) samples.emplace_back(L, largest_eb(LatticeModel::create(1.0, B, L), L / 2));
    const auto fit = fit_scaling(samples);
    c.note(B == 2 ? "B=2 exponent %.3f" : "B=3 exponent %.3f", fit.exponent);
    c.expect(std::abs(fit.exponent - 0.5 * (B - 1)) <= 0.2, "exponent for B=" + std::to_string(B));
  }
}

void disorder_robustness(Criterion& c) {
  const DisorderConfig cfg{0.05, DisorderMode::complex, 50, 2024, false};
  const auto b2 = run_ensemble(LatticeModel::create(1.0, 2, 50), 49, cfg);
  c.note("B=2 gap %.3f", b2.min_cluster_gap);
  c.note("spread %.3f", b2.eb_fractional_spread);
  c.expect(b2.failed_instances == 0 && b2.min_cluster_gap > 0.0, "B=2 EB-to-non-EB gap");
  c.expect(b2.eb_fractional_spread <= 3 * cfg.delta, "B=2 spread within 3 delta");

  const auto b3 = run_ensemble(LatticeModel::create(1.0, 3, 50), 49, cfg);
  c.note("B=3 cloud radius %.3f", b3.non_eb_cloud_radius);
  c.note("gap %.3f", b3.min_cluster_gap);
  c.expect(!b3.non_eb_clouds_resolved, "B=3 clouds of 0 and 1 merge");
  c.expect(b3.failed_instances == 0 && b3.min_cluster_gap > 0.0, "B=3 EB clusters resolved");
}

void oracle_suites(Criterion& c) {
  std::mt19937_64 gen(11);
  double eig_err = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    const auto m = oracle::random_matrix(1 + trial % 6, gen);
    eig_err = std::max(eig_err, oracle::multiset_distance(eigenvalues(testutil::from_oracle(m)), oracle::eigenvalues(m)));
  }
  c.note("eigensolver %.1e", eig_err);
  c.expect(eig_err <= 1e-8, "eigensolver vs characteristic polynomial");

  double map_err = 0.0;
  double block_err = 0.0;
  for (const auto& [m, x] : {std::pair{LatticeModel::create(14.0, 7, 4), 3}, std::pair{LatticeModel::create(1.0, 3, 40), 5},
                             std::pair{LatticeModel::create(1.0, 2, 30), 11}}) {
    const auto p = build_truncated_projector(m, x);
    const auto lam = lambda_operator(p);
    std::vector<Complex> mapped;
    for (const auto z : eigenvalues(p.matrix)) mapped.push_back(4.0 * z * (z - 1.0));
    const double scale = std::max(1.0, lam.matrix.cwiseAbs().maxCoeff());
    map_err = std::max(map_err, oracle::multiset_distance(mapped, eigenvalues(lam.matrix)) / scale);
    block_err = std::max(block_err, lam.off_block_norm / scale);
  }
  c.note("Lambda mapping %.1e", map_err);
  c.note("off-block %.1e", block_err);
  c.expect(map_err <= 1e-8 && block_err <= 1e-8, "Lambda spectral mapping and block structure");

  const CircuitSpec spec;
  double z_err = 0.0;
  for (const double f : {150e3, 320e3, 346e3, 380e3, 600e3})
    for (int i = 1; i <= 6; ++i)
      for (int j = i + 1; j <= 6; ++j) {
        const Complex e = impedance(spec, kTwoPi * f, i, j, ImpedanceMethod::eigen);
        const Complex d = impedance(spec, kTwoPi * f, i, j, ImpedanceMethod::direct);
        z_err = std::max(z_err, std::abs(e - d) / std::max(1e-300, std::abs(d)));
      }
  c.note("impedance %.1e", z_err);
  c.expect(z_err <= 1e-8, "impedance eigen expansion vs direct inverse");

  const auto rec = reconstruct_laplacian(spec, kTwoPi * 400e3, 0.0, 1);
  const double rec_err = (rec.projector - effective_projector(spec)).cwiseAbs().maxCoeff();
  c.note("reconstruction %.1e", rec_err);
  c.expect(rec_err <= 1e-9, "noiseless reconstruction round trip");
}

void two_point_asymptotics(Criterion& c) {
  {
    const int L = 200;
    const auto t = two_point_functions(LatticeModel::create(1.0, 1, L));
    std::vector<double> lg, one, y;
    for (int x = 2; x <= L / 8; ++x) {
      lg.push_back(std::log(L / (std::numbers::pi * x)));
      one.push_back(1.0);
      y.push_back(t.U[static_cast<std::size_t>(x)]);
    }
    const auto fit = least_squares({lg, one}, y);
    c.note("B=1 log fit R^2 %.4f", fit.r_squared);
    c.note("slope %.3f", fit.coefficients[0]);
    c.expect(fit.r_squared > 0.9, "B=1 log fit");
  }
  {
    const int L = 200;
    const auto t = two_point_functions(LatticeModel::create(1.0, 2, L));
    std::vector<double> inv, lin, cst, y;
    for (int x = 2; x <= 20; ++x) {
      inv.push_back(static_cast<double>(L) / x);
      lin.push_back(-static_cast<double>(x));
      cst.push_back(static_cast<double>(L));
      y.push_back(t.U[static_cast<std::size_t>(x)]);
    }
    const auto fit = least_squares({inv, lin}, y);
    c.note("B=2 c1 L/x - c2 x fit R^2 %.4f", fit.r_squared);
    // Diagnostic only: the same data against c1 L - c2 x.
    c.note("(c1 L - c2 x gives R^2 %.6f)", least_squares({cst, lin}, y).r_squared);
    c.expect(fit.r_squared > 0.95, "B=2 L/x - x fit");
  }
  for (const int B : {2, 3})
    for (const int L : {64, 128}) {
      const double u = two_point_functions(LatticeModel::create(1.0, B, L)).U[0];
      const double u2 = two_point_functions(LatticeModel::create(1.0, B, 2 * L)).U[0];
      const double ratio = u2 / u;
      const double target = std::pow(2.0, B - 1);
      c.note(B == 2 ? "B=2 ratio %.4f" : "B=3 ratio %.4f", ratio);
      c.expect(std::abs(ratio / target - 1.0) <= 0.1, "divergence ratio B=" + std::to_string(B) + " L=" + std::to_string(L));
    }
}

struct Entry {
  int id;
  const char* title;
  void (*run)(Criterion&);
};

}  // namespace

int main() {
  const Entry entries[] = {
      {1, "published-matrix regression", published_matrix},
      {2, "exact EB eigenvalues", exact_eb_eigenvalues},
      {3, "circuit projector spectrum", circuit_spectrum},
      {4, "resonance frequencies", resonance_frequencies},
      {5, "sweep realism", sweep_realism},
      {6, "EB eigenstate profile", eb_profiles},
      {7, "spectral flow", spectral_flow_check},
      {8, "duality", duality},
      {9, "scaling law", scaling_law},
      {10, "disorder robustness", disorder_robustness},
      {11, "oracle suites", oracle_suites},
      {12, "two-point asymptotics", two_point_asymptotics},
  };
  int failures = 0;
  for (const auto& e : entries) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    try {
      e.run(c);
    } catch (const std::exception& ex) {
      c.expect(false, std::string("exception: ") + ex.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !c.pass();
    std::printf("%s %2d %s (%.2fs): %s\n", c.pass() ? "PASS" : "FAIL", e.id, e.title, secs, c.detail().c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(entries)) - failures, std::size(entries));
  return failures == 0 ? 0 : 1;
}
