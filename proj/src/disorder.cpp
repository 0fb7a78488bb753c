#include "ebstates/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ebstates/error.hpp"
#include "parallel.hpp"

namespace ebstates {

namespace {

// 53 random bits -> [0, 1). Written out so streams are identical across
// standard library implementations.
double unit_draw(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace

DisorderMode parse_disorder_mode(std::string_view s) {
  if (s == "real") return DisorderMode::real;
  if (s == "imaginary" || s == "imag") return DisorderMode::imaginary;
  if (s == "complex") return DisorderMode::complex;
  fail(ErrorCode::invalid_argument, "disorder mode must be real, imaginary or complex, got '" +
                                        std::string(s) + "'");
}

std::string_view to_string(DisorderMode m) {
  switch (m) {
    case DisorderMode::real: return "real";
    case DisorderMode::imaginary: return "imaginary";
    case DisorderMode::complex: return "complex";
  }
  return "complex";
}

void DisorderConfig::validate() const {
  require(std::isfinite(delta) && delta >= 0.0 && delta <= 1.0, "disorder: delta must lie in [0, 1]");
  require(instances >= 1, "disorder: instances must be at least 1");
}

ComplexMatrix perturb(const ComplexMatrix& p, const DisorderConfig& cfg, std::uint64_t instance_index) {
  cfg.validate();
  ComplexMatrix out = p;
  if (cfg.delta == 0.0) return out;

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.base_seed), static_cast<std::uint32_t>(cfg.base_seed >> 32),
                    static_cast<std::uint32_t>(instance_index),
                    static_cast<std::uint32_t>(instance_index >> 32)};
  std::mt19937_64 gen(seq);
  const bool draw_re = cfg.mode != DisorderMode::imaginary;
  const bool draw_im = cfg.mode != DisorderMode::real;
  auto draw = [&] { return cfg.delta * (2.0 * unit_draw(gen) - 1.0); };

  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (i == j && !cfg.perturb_diagonal) continue;
      const double r_re = draw_re ? draw() : 0.0;
      const double r_im = draw_im ? draw() : 0.0;
      out(i, j) *= Complex(1.0 + r_re, r_im);
    }
  return out;
}

EnsembleResult run_ensemble(const LatticeModel& model, int x_cut, const DisorderConfig& cfg, double threshold) {
  cfg.validate();
  const auto clean = build_truncated_projector(model, x_cut);
  const auto clean_spec = eigenvalues(clean.matrix);

  EnsembleResult out;
  out.reference_eb = classify(clean_spec, threshold).eb_values;
  std::sort(out.reference_eb.begin(), out.reference_eb.end(),
            [](Complex a, Complex b) { return a.real() < b.real(); });

  const auto n = static_cast<std::size_t>(cfg.instances);
  out.spectra.resize(n);
  out.is_eb.resize(n);
  out.failures.resize(n);

  detail::parallel_for(n, [&](std::size_t inst) {
    try {
      auto spec = eigenvalues(perturb(clean.matrix, cfg, inst));
      std::vector<bool> eb(spec.size(), false);
      for (const Complex target : out.reference_eb) {
        std::size_t best = spec.size();
        for (std::size_t i = 0; i < spec.size(); ++i)
          if (!eb[i] && (best == spec.size() || std::abs(spec[i] - target) < std::abs(spec[best] - target)))
            best = i;
        if (best < spec.size()) eb[best] = true;
      }
      out.spectra[inst] = std::move(spec);
      out.is_eb[inst] = std::move(eb);
    } catch (const Error& e) {
      out.failures[inst] = e.what();
    }
  });

  std::vector<Complex> eb_points, normal_points;
  std::vector<Complex> centroid_sum(out.reference_eb.size(), Complex(0.0, 0.0));
  std::vector<std::size_t> centroid_count(out.reference_eb.size(), 0);
  double rel_sq = 0.0;
  std::size_t rel_n = 0;
  for (std::size_t inst = 0; inst < n; ++inst) {
    if (!out.failures[inst].empty()) {
      ++out.failed_instances;
      continue;
    }
    const auto& spec = out.spectra[inst];
    for (std::size_t i = 0; i < spec.size(); ++i) {
      if (!out.is_eb[inst][i]) {
        normal_points.push_back(spec[i]);
        continue;
      }
      eb_points.push_back(spec[i]);
      std::size_t ref = 0;
      for (std::size_t r = 1; r < out.reference_eb.size(); ++r)
        if (std::abs(spec[i] - out.reference_eb[r]) < std::abs(spec[i] - out.reference_eb[ref])) ref = r;
      centroid_sum[ref] += spec[i];
      ++centroid_count[ref];
      const double rel = std::abs(spec[i] - out.reference_eb[ref]) / std::abs(out.reference_eb[ref]);
      rel_sq += rel * rel;
      ++rel_n;
    }
  }

  for (std::size_t r = 0; r < out.reference_eb.size(); ++r)
    out.eb_cluster_centroids.push_back(centroid_count[r] ? centroid_sum[r] / static_cast<double>(centroid_count[r])
                                                         : out.reference_eb[r]);
  out.eb_fractional_spread = rel_n ? std::sqrt(rel_sq / static_cast<double>(rel_n)) : 0.0;

  double gap = std::numeric_limits<double>::infinity();
  for (const Complex e : eb_points)
    for (const Complex q : normal_points) gap = std::min(gap, std::abs(e - q));
  out.min_cluster_gap = std::isfinite(gap) ? gap : 0.0;

  double radius = 0.0;
  for (const Complex q : normal_points) radius = std::max(radius, std::min(std::abs(q), std::abs(q - 1.0)));
  out.non_eb_cloud_radius = radius;
  out.non_eb_clouds_resolved = radius < 0.5;
  return out;
}

}  // namespace ebstates
