#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/spatial_index.hpp"

namespace svc {

struct Correspondence {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::optional<double> weight;  // descriptor similarity in [0, 1], if known

  bool operator==(const Correspondence&) const = default;
};

/// Putative (source index, target index) matches. Duplicate pairs and weights
/// outside [0, 1] are rejected with InvalidArgument; index bounds are checked
/// against concrete clouds with validate().
class CorrespondenceSet {
 public:
  CorrespondenceSet() = default;
  explicit CorrespondenceSet(std::vector<Correspondence> pairs);

  void add(const Correspondence& c);
  /// Throws IndexOutOfBounds when any pair refers past the given cloud sizes.
  void validate(std::size_t src_size, std::size_t dst_size) const;

  const std::vector<Correspondence>& pairs() const { return pairs_; }
  const Correspondence& operator[](std::size_t i) const { return pairs_[i]; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

 private:
  std::vector<Correspondence> pairs_;
};

/// Every tunable of the constraint and the evaluation loop.
struct SvcConfig {
  double tau = 0.1;              // inlier tolerance, meters
  double eta1 = 0.10;            // minimum overlap fraction for the admissible range
  double eta2 = 0.02;            // blocked-point budget, fraction of the target size
  double t_threshold = 0.99997;  // same-sight dot-product bound
  std::size_t k = 200;           // hypothesis count
  double min_range = 1e-6;       // sensor dead zone, meters

  static SvcConfig indoor() { return {}; }
  static SvcConfig outdoor() {
    SvcConfig c;
    c.tau = 0.6;
    return c;
  }

  /// Throws InvalidArgument naming the first violated bound.
  void validate() const;
};

/// Distance from each transformed source point to its nearest target point.
std::vector<double> nn_residuals(const PointCloud& src, const RigidTransform& t, const NNIndex& dst_index);

/// Residuals strictly below tau.
std::size_t inlier_count(std::span<const double> residuals, double tau);

/// Pairs whose stated partner lies strictly within tau after transforming the source.
std::size_t correspondence_inlier_count(const CorrespondenceSet& corr, const PointCloud& src,
                                        const PointCloud& dst, const RigidTransform& t, double tau);

/// Truncated errors: averaged over residuals below tau only, 0 without inliers.
double mae(std::span<const double> residuals, double tau);
double mse(std::span<const double> residuals, double tau);

/// Admissible-range test: inlier count over all source points > eta1 * |src|.
bool in_range(const PointCloud& src, const NNIndex& dst_index, const RigidTransform& t, const SvcConfig& cfg);

/// Inlier fraction of src under t, the overlap measure used by the simulator.
double overlap_fraction(const PointCloud& src, const NNIndex& dst_index, const RigidTransform& t, double tau);

}  // namespace svc
