#include "svc/svc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svc/error.hpp"

namespace svc {

PointCloud non_overlap(const PointCloud& src, const RigidTransform& t, const NNIndex& dst_index, double tau) {
  std::vector<Point3> kept;
  for (const auto& p : src.points()) {
    const Point3 moved = t(p);
    if (dst_index.nearest(moved).distance > tau) kept.push_back(moved);
  }
  return PointCloud(std::move(kept), t(src.viewpoint()));
}

SphereProjection project_sphere(const PointCloud& pc, const Point3& sensor, double min_range) {
  if (!is_finite(sensor)) throw Error(ErrorCode::InvalidArgument, "sensor position is not finite");
  SphereProjection out;
  out.directions.reserve(pc.size());
  out.source_indices.reserve(pc.size());
  out.ranges.reserve(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Point3 ray = pc[i] - sensor;
    const double range = ray.norm();
    // The zero vector has no direction, whatever min_range says.
    if (range < min_range || range == 0.0) continue;
    out.directions.push_back(ray / range);
    out.source_indices.push_back(i);
    out.ranges.push_back(range);
  }
  if (out.empty()) throw Error(ErrorCode::AllPointsDegenerate, "no point survives the sensor dead zone");
  return out;
}

std::size_t blocked_count(const SphereProjection& target, const SphereProjection& occluders, const SvcConfig& cfg) {
  if (occluders.empty() || target.empty()) return 0;
  const NNIndex index = NNIndex::build_directions(occluders.directions);
  std::size_t blocked = 0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    const DirectionMatch m = index.nearest_direction(target.directions[j]);
    if (m.dot > cfg.t_threshold && target.ranges[j] - occluders.ranges[m.index] > cfg.tau) ++blocked;
  }
  return blocked;
}

SvcCheckResult svc_check(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                         const NNIndex& dst_index, const SvcConfig& cfg) {
  const PointCloud occluders = non_overlap(src, t, dst_index, cfg.tau);
  if (occluders.empty()) return {true, 0};
  std::size_t bc = 0;
  try {
    const SphereProjection target_proj = project_sphere(dst, dst.viewpoint(), cfg.min_range);
    const SphereProjection occluder_proj = project_sphere(occluders, dst.viewpoint(), cfg.min_range);
    bc = blocked_count(target_proj, occluder_proj, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllPointsDegenerate) throw;
    return {true, 0};
  }
  return {static_cast<double>(bc) < cfg.eta2 * static_cast<double>(dst.size()), bc};
}

SvcVerdict svc_double_check(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                            const NNIndex& src_index, const NNIndex& dst_index, const SvcConfig& cfg) {
  const SvcCheckResult forward = svc_check(src, dst, t, dst_index, cfg);
  const SvcCheckResult backward = svc_check(dst, src, inverse(t), src_index, cfg);
  SvcVerdict v;
  v.forward_blocked = forward.blocked;
  v.backward_blocked = backward.blocked;
  v.forward_budget = static_cast<std::size_t>(std::ceil(cfg.eta2 * static_cast<double>(dst.size())));
  v.backward_budget = static_cast<std::size_t>(std::ceil(cfg.eta2 * static_cast<double>(src.size())));
  v.accepted = forward.passed && backward.passed;
  return v;
}

EvaluationResult evaluate_hypotheses(const PointCloud& src, const PointCloud& dst, const CorrespondenceSet& corr,
                                     std::span<const RigidTransform> hypotheses, const SvcConfig& cfg) {
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyHypotheses, "no hypotheses to evaluate");
  const NNIndex src_index = NNIndex::build(src.points());
  const NNIndex dst_index = NNIndex::build(dst.points());
  return evaluate_hypotheses(src, dst, corr, hypotheses, src_index, dst_index, cfg);
}

EvaluationResult evaluate_hypotheses(const PointCloud& src, const PointCloud& dst, const CorrespondenceSet& corr,
                                     std::span<const RigidTransform> hypotheses, const NNIndex& src_index,
                                     const NNIndex& dst_index, const SvcConfig& cfg) {
  if (hypotheses.empty()) throw Error(ErrorCode::EmptyHypotheses, "no hypotheses to evaluate");
  cfg.validate();

  EvaluationResult result;
  result.scores.reserve(hypotheses.size());
  for (const auto& h : hypotheses) {
    result.scores.push_back(correspondence_inlier_count(corr, src, dst, h, cfg.tau));
  }
  result.order.resize(hypotheses.size());
  std::iota(result.order.begin(), result.order.end(), std::size_t{0});
  std::stable_sort(result.order.begin(), result.order.end(),
                   [&](std::size_t a, std::size_t b) { return result.scores[a] > result.scores[b]; });

  result.best_input_index = result.order.front();
  result.best = hypotheses[result.best_input_index];
  for (std::size_t rank = 0; rank < result.order.size(); ++rank) {
    const std::size_t i = result.order[rank];
    result.verdicts.push_back(svc_double_check(src, dst, hypotheses[i], src_index, dst_index, cfg));
    if (result.verdicts.back().accepted) {
      result.best = hypotheses[i];
      result.best_input_index = i;
      result.best_rank = rank;
      result.accepted = true;
      break;
    }
  }
  return result;
}

}  // namespace svc
