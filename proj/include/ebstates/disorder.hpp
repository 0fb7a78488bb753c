#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ebstates/eb_analysis.hpp"
#include "ebstates/linalg.hpp"
#include "ebstates/model.hpp"

namespace ebstates {

enum class DisorderMode { real, imaginary, complex };

DisorderMode parse_disorder_mode(std::string_view s);
std::string_view to_string(DisorderMode m);

/// Each hopping is multiplied by 1 + r_R + i r_I with r uniform on
/// [-delta, delta]. Which of r_R, r_I is drawn depends on `mode`.
struct DisorderConfig {
  double delta = 0.0;
  DisorderMode mode = DisorderMode::complex;
  int instances = 1;
  std::uint64_t base_seed = 0;
  bool perturb_diagonal = false;

  void validate() const;
};

/// Instance `instance_index` of the disorder ensemble. The random stream is
/// seeded from (base_seed, instance_index) alone and walks the matrix in
/// row-major order, so any instance can be regenerated in isolation.
ComplexMatrix perturb(const ComplexMatrix& p, const DisorderConfig& cfg, std::uint64_t instance_index);

struct EnsembleResult {
  std::vector<std::vector<Complex>> spectra;  // one per instance; empty if it failed
  std::vector<std::vector<bool>> is_eb;
  std::vector<std::string> failures;          // per instance, empty on success
  std::size_t failed_instances = 0;

  std::vector<Complex> reference_eb;          // EB values of the clean matrix
  std::vector<Complex> eb_cluster_centroids;  // one per reference EB value
  double eb_fractional_spread = 0.0;          // rms |p - p0| / |p0| over EB points
  double min_cluster_gap = 0.0;               // min distance EB point <-> non-EB point
  double non_eb_cloud_radius = 0.0;           // max distance of a non-EB point to {0, 1}
  bool non_eb_clouds_resolved = true;         // clouds around 0 and 1 do not touch
};

/// Runs the ensemble on the truncated projector of `model` at `x_cut`.
/// In each instance the EB points are the eigenvalues matched (nearest,
/// greedily) to the clean EB values; everything else counts as non-EB.
EnsembleResult run_ensemble(const LatticeModel& model, int x_cut, const DisorderConfig& cfg,
                            double threshold = kDefaultEbThreshold);

}  // namespace ebstates
