#include "svc/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "svc/error.hpp"

namespace svc {

namespace {

constexpr std::uint32_t kLeafSize = 8;
constexpr double kUnitTolerance = 1e-9;

bool is_unit(const Point3& p) { return std::abs(p.norm() - 1.0) <= kUnitTolerance; }

}  // namespace

NNIndex::NNIndex(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw Error(ErrorCode::EmptyInput, "cannot build an index over no points");
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "too many points for the index");
  }
  for (const auto& p : points_) {
    if (!is_finite(p)) throw Error(ErrorCode::InvalidArgument, "non-finite point in index input");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build_node(0, static_cast<std::uint32_t>(points_.size()));
}

NNIndex NNIndex::build(std::span<const Point3> points) { return NNIndex(points); }

NNIndex NNIndex::build_directions(std::span<const Point3> directions) {
  for (const auto& d : directions) {
    if (!is_unit(d)) throw Error(ErrorCode::NotUnitNorm, "direction index input is not unit norm");
  }
  NNIndex index(directions);
  index.unit_vectors_ = true;
  return index;
}

std::int32_t NNIndex::build_node(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  // Read before recursing: the children reorder their ranges.
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build_node(begin, mid);
  const std::int32_t right = build_node(mid, end);
  Node& node = nodes_[id];
  node.axis = static_cast<std::uint8_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void NNIndex::search(std::int32_t id, const Point3& q, double& best_d2, std::size_t& best_idx) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
        best_d2 = d2;
        best_idx = idx;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near_child = diff < 0 ? node.left : node.right;
  const std::int32_t far_child = diff < 0 ? node.right : node.left;
  search(near_child, q, best_d2, best_idx);
  // <= keeps equal-distance candidates with a smaller index reachable.
  if (diff * diff <= best_d2) search(far_child, q, best_d2, best_idx);
}

Neighbor NNIndex::nearest(const Point3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_idx = std::numeric_limits<std::size_t>::max();
  search(0, query, best_d2, best_idx);
  return {best_idx, std::sqrt(best_d2)};
}

DirectionMatch NNIndex::nearest_direction(const Point3& direction) const {
  if (!unit_vectors_) throw Error(ErrorCode::NotUnitNorm, "index was not built over unit vectors");
  if (!is_unit(direction)) throw Error(ErrorCode::NotUnitNorm, "query direction is not unit norm");
  const Neighbor nn = nearest(direction);
  return {nn.index, points_[nn.index].dot(direction)};
}

}  // namespace svc
