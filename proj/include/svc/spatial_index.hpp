#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svc/geometry.hpp"

namespace svc {

struct Neighbor {
  std::size_t index = 0;   // position in the list the index was built from
  double distance = 0.0;   // meters (Euclidean)
};

struct DirectionMatch {
  std::size_t index = 0;
  double dot = 0.0;
};

/// Static median-split kd-tree over a point list. Exact nearest-neighbor
/// queries; ties on distance resolve to the smallest original index so that
/// results match an exhaustive scan element for element.
///
/// Built over unit vectors (build_directions) the same tree also answers
/// maximum-dot-product queries, since for unit a, b:
/// |a - b|^2 = 2 - 2<a, b>.
class NNIndex {
 public:
  /// Throws EmptyInput for an empty list, InvalidArgument for non-finite points.
  static NNIndex build(std::span<const Point3> points);
  /// Same as build() but additionally requires unit norm (within 1e-9).
  static NNIndex build_directions(std::span<const Point3> directions);

  Neighbor nearest(const Point3& query) const;
  /// Throws NotUnitNorm unless the index was built from directions and the
  /// query has unit norm.
  DirectionMatch nearest_direction(const Point3& direction) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Point3>& points() const { return points_; }
  bool unit_vectors() const { return unit_vectors_; }

 private:
  struct Node {
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  explicit NNIndex(std::span<const Point3> points);
  std::int32_t build_node(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, double& best_d2, std::size_t& best_idx) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  bool unit_vectors_ = false;
};

}  // namespace svc
