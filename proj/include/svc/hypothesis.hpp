#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/metrics.hpp"

namespace svc {

struct HypothesisBatch {
  std::vector<RigidTransform> transforms;
  std::vector<std::size_t> ic_scores;                     // correspondence inlier count at cfg.tau
  std::vector<std::array<std::size_t, 3>> provenance;     // sampled correspondence triple

  std::size_t size() const { return transforms.size(); }
  bool empty() const { return transforms.empty(); }
};

struct GeneratorOptions {
  double tau_c = 0.0;                // pairwise length-consistency bound; <= 0 means cfg.tau
  int refine_iterations = 2;         // least-squares refits on the hypothesis' inliers
  double dedup_rotation_deg = 0.5;   // near-duplicate bound on rotation
  double dedup_translation_frac = 0.5;  // near-duplicate bound on translation, as a fraction of tau
};

/// Fraction of the other correspondences whose pairwise source and target
/// distances agree within tau_c. Throws TooFewCorrespondences below 2 pairs.
std::vector<double> compatibility_weights(const CorrespondenceSet& corr, const PointCloud& src,
                                          const PointCloud& dst, double tau_c);

/// Up to cfg.k rigid hypotheses from compatibility-guided minimal samples.
/// Deterministic for a fixed seed. Throws TooFewCorrespondences below 3
/// pairs and NoValidHypothesis when every sample is degenerate.
HypothesisBatch generate(const CorrespondenceSet& corr, const PointCloud& src, const PointCloud& dst,
                         const SvcConfig& cfg, std::uint64_t seed, const GeneratorOptions& options = {});

}  // namespace svc
