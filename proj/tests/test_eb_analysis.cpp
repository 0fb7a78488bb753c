#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ebstates/eb_analysis.hpp"
#include "ebstates/error.hpp"
#include "test_util.hpp"

using namespace ebstates;

TEST_CASE("classification by distance from [0, 1]") {
  const std::vector<Complex> spec{2.0073, -1.0073, 0.0, 0.0, 1.0, 1.0};
  const auto c = classify(spec);
  REQUIRE(c.eb_values.size() == 2);
  CHECK(c.eb_values[0] == Complex(2.0073));
  CHECK(c.eb_values[1] == Complex(-1.0073));
  CHECK(c.normal_values.size() == 4);

  CHECK(classify(std::vector<Complex>{0.0, 1.0}).eb_values.empty());
  CHECK(classify(std::vector<Complex>{0.5}).eb_values.empty());
  CHECK(classify(std::vector<Complex>{Complex(0.5, 0.2)}).eb_values.size() == 1);
  CHECK(distance_to_unit_segment(Complex(0.5, -0.3)) == doctest::Approx(0.3));
  CHECK(distance_to_unit_segment(Complex(-3.0, 4.0)) == doctest::Approx(5.0));
  CHECK_THROWS_AS(classify(spec, 0.0), Error);
}

TEST_CASE("flow for B=3, L=50: branch structure and crossing") {
  const auto model = LatticeModel::create(1.0, 3, 50);
  const auto flow = spectral_flow(model, 1, 50);
  REQUIRE(flow.rows.size() == 50);
  for (const auto& row : flow.rows) {
    REQUIRE_FALSE(row.failed);
    CHECK(row.eigenvalues.size() == static_cast<std::size_t>(2 * row.x_cut));
    const auto eb = row.eb_values();
    if (row.x_cut == 1 || row.x_cut == 49) CHECK(eb.size() == 2);
    else if (row.x_cut < 49) CHECK(eb.size() == 4);
    else CHECK(eb.empty());
  }
  // x_cut = 1 pair, from an independent dense evaluation.
  const auto ev1 = testutil::sorted_real(flow.rows[0].eigenvalues);
  CHECK(ev1[0] == doctest::Approx(-5.8380564780219455).epsilon(1e-10));
  CHECK(ev1[1] == doctest::Approx(6.838056478021945).epsilon(1e-10));

  // The two growing values meet at x_cut = L/2.
  const auto mid = flow.rows[24].eb_values();
  std::vector<double> upper;
  for (const auto z : mid)
    if (z.real() > 0.5) upper.push_back(z.real());
  REQUIRE(upper.size() == 2);
  CHECK(upper[0] == doctest::Approx(5.186189247874868).epsilon(1e-8));
  CHECK(upper[1] == doctest::Approx(5.186189247874868).epsilon(1e-8));

  for (const auto z : flow.rows[49].eigenvalues) CHECK(std::min(std::abs(z), std::abs(z - 1.0)) < 1e-9);

  const auto branches = track_branches(flow);
  std::size_t long_branches = 0;
  for (const auto& b : branches)
    if (b.x_cut.size() > 20) ++long_branches;
  CHECK(long_branches == 2);
}

TEST_CASE("flow range validation and row order") {
  const auto model = LatticeModel::create(1.0, 2, 10);
  CHECK_THROWS_AS(spectral_flow(model, 0, 5), Error);
  CHECK_THROWS_AS(spectral_flow(model, 3, 11), Error);
  CHECK_THROWS_AS(spectral_flow(model, 6, 5), Error);
  const auto flow = spectral_flow(model, 3, 7);
  for (std::size_t i = 0; i < flow.rows.size(); ++i) CHECK(flow.rows[i].x_cut == 3 + static_cast<int>(i));
}

TEST_CASE("duality x_cut <-> L - x_cut for the EB values") {
  const auto small = LatticeModel::create(14.0, 7, 4);
  const auto a = classify(eigenvalues(build_truncated_projector(small, 1).matrix)).eb_values;
  const auto b = classify(eigenvalues(build_truncated_projector(small, 3).matrix)).eb_values;
  CHECK(oracle::multiset_distance(a, b) < 1e-6);
}

TEST_CASE("Lambda operator: spectral mapping, sublattice blocks, projector limit") {
  const auto model = LatticeModel::create(14.0, 7, 4);
  const auto p = build_truncated_projector(model, 3);
  const auto lam = lambda_operator(p);
  CHECK(lam.off_block_norm < 1e-8);

  std::vector<Complex> mapped;
  for (const auto z : eigenvalues(p.matrix)) mapped.push_back(4.0 * z * (z - 1.0));
  CHECK(oracle::multiset_distance(mapped, eigenvalues(lam.matrix)) < 1e-8);
  const auto lam_ev = testutil::sorted_real(eigenvalues(lam.matrix));
  CHECK(lam_ev.back() == doctest::Approx(4.0 * 2.007266354874444 * 1.007266354874444).epsilon(1e-9));

  const auto full = lambda_operator(build_truncated_projector(LatticeModel::create(1.0, 3, 20), 20));
  CHECK(full.matrix.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Lambda estimate: full mode tracks the growing branch") {
  const auto model = LatticeModel::create(1.0, 3, 40);
  const double est = estimate_lambda_eb(model, 5, LambdaEstimate::full);
  const auto lam = testutil::sorted_real(eigenvalues(lambda_operator(build_truncated_projector(model, 5)).matrix));
  // Exact growing-branch value, cross-checked with a dense evaluation.
  const double exact = lam[lam.size() - 3];
  CHECK(exact == doctest::Approx(6.910982666612041).epsilon(1e-8));
  CHECK(est > 0.0);
  CHECK(est / exact < 2.0);
  CHECK(exact / est < 2.0);
}

TEST_CASE("Lambda estimate: linear mode is linear through the origin") {
  const auto model = LatticeModel::create(1.0, 3, 40);
  std::vector<double> x, y;
  for (int c = 2; c <= 10; ++c) {
    x.push_back(c);
    y.push_back(estimate_lambda_eb(model, c, LambdaEstimate::linear));
  }
  CHECK(least_squares({x}, y).r_squared > 0.9);
  CHECK_THROWS_AS(estimate_lambda_eb(LatticeModel::create(1.0, 1, 40), 4, LambdaEstimate::linear), Error);
  CHECK_THROWS_AS(estimate_lambda_eb(model, 0, LambdaEstimate::full), Error);
}

TEST_CASE("scaling fit") {
  std::vector<std::pair<double, double>> exact;
  for (const double L : {16.0, 32.0, 64.0, 128.0}) exact.emplace_back(L, 0.5 + std::pow(L, 0.7));
  const auto fit = fit_scaling(exact);
  CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(fit.prefactor == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  const std::vector<std::pair<double, double>> two{{10, 3}, {20, 4}};
  CHECK_THROWS_AS(fit_scaling(two), Error);
  const std::vector<std::pair<double, double>> bad{{10, 3}, {20, 0.9}, {40, 5}};
  CHECK_THROWS_AS(fit_scaling(bad), Error);
}

TEST_CASE("least squares R^2 can go negative for a bad basis") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{5, 4, 3, 2, 1};
  CHECK(least_squares({x}, y).r_squared < 0.0);
}

TEST_CASE("entanglement entropy conventions") {
  CHECK(entanglement_entropy(std::vector<Complex>{0.0, 1.0, 0.0, 1.0}).real == 0.0);
  CHECK(entanglement_entropy(std::vector<Complex>{0.5}).real == doctest::Approx(std::log(2.0)));
  const auto s = entanglement_entropy(std::vector<Complex>{2.0073, -1.0073, 0.0, 0.0, 1.0, 1.0});
  CHECK(s.real < 0.0);
  CHECK(s.imag_remnant >= 0.0);
}
