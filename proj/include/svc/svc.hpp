#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/metrics.hpp"
#include "svc/spatial_index.hpp"

namespace svc {

/// Points seen from a sensor position as (unit direction, range) pairs.
struct SphereProjection {
  std::vector<Point3> directions;
  std::vector<std::size_t> source_indices;  // into the projected cloud
  std::vector<double> ranges;               // meters from the sensor

  std::size_t size() const { return directions.size(); }
  bool empty() const { return directions.empty(); }
};

struct SvcCheckResult {
  bool passed = true;
  std::size_t blocked = 0;
};

struct SvcVerdict {
  bool accepted = true;
  std::size_t forward_blocked = 0;   // source -> target check
  std::size_t backward_blocked = 0;  // target -> source check with the inverse motion
  std::size_t forward_budget = 0;    // ceil(eta2 * |dst|), reporting only
  std::size_t backward_budget = 0;   // ceil(eta2 * |src|), reporting only
};

/// Transformed source points whose nearest target point is farther than tau.
/// The viewpoint of the result is the transformed source viewpoint.
PointCloud non_overlap(const PointCloud& src, const RigidTransform& t, const NNIndex& dst_index, double tau);

/// Directions and ranges of pc as seen from sensor. Points closer than
/// min_range are dropped; throws AllPointsDegenerate if none remain.
SphereProjection project_sphere(const PointCloud& pc, const Point3& sensor, double min_range);

/// Blocked-point count. For every target direction the single nearest occluder
/// direction is looked up; the target is in the region of interest when their
/// dot product exceeds t_threshold and is blocked when it lies more than tau
/// behind that occluder.
std::size_t blocked_count(const SphereProjection& target, const SphereProjection& occluders, const SvcConfig& cfg);

/// One direction of the constraint, evaluated in the target's sensor frame.
/// Passes iff blocked < eta2 * |dst|.
SvcCheckResult svc_check(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                         const NNIndex& dst_index, const SvcConfig& cfg);

/// Forward check with t and backward check with inverse(t); both must pass.
SvcVerdict svc_double_check(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                            const NNIndex& src_index, const NNIndex& dst_index, const SvcConfig& cfg);

struct EvaluationResult {
  RigidTransform best;
  std::size_t best_input_index = 0;  // position of best in the hypothesis list
  std::size_t best_rank = 0;         // position of best after sorting by inlier count
  bool accepted = false;             // false when every hypothesis was rejected
  std::vector<std::size_t> order;    // input indices sorted by descending inlier count
  std::vector<std::size_t> scores;   // inlier count per input hypothesis
  std::vector<SvcVerdict> verdicts;  // in sorted order, up to and including the accepted one
};

/// Ranks hypotheses by correspondence inlier count (stable, descending) and
/// returns the first one passing the double check; falls back to the top
/// ranked hypothesis when none does. Throws EmptyHypotheses.
EvaluationResult evaluate_hypotheses(const PointCloud& src, const PointCloud& dst, const CorrespondenceSet& corr,
                                     std::span<const RigidTransform> hypotheses, const SvcConfig& cfg);

/// Same as above with prebuilt indices over src and dst.
EvaluationResult evaluate_hypotheses(const PointCloud& src, const PointCloud& dst, const CorrespondenceSet& corr,
                                     std::span<const RigidTransform> hypotheses, const NNIndex& src_index,
                                     const NNIndex& dst_index, const SvcConfig& cfg);

}  // namespace svc
