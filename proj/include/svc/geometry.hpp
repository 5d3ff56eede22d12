#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace svc {

using Point3 = Eigen::Vector3d;

bool is_finite(const Point3& p);

/// Ordered 3D points (meters) together with the scan origin they were
/// measured from. Coordinates are checked for finiteness on construction.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points, const Point3& viewpoint = Point3::Zero());

  const std::vector<Point3>& points() const { return points_; }
  const Point3& viewpoint() const { return viewpoint_; }
  const Point3& operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<Point3> points_;
  Point3 viewpoint_ = Point3::Zero();
};

/// Proper rigid motion x -> R x + t. The rotation block is validated on
/// construction (orthonormal and det = +1 within 1e-9 per entry).
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform();
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);
  /// Angle in radians about a (not necessarily unit) axis.
  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                        const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  Point3 operator()(const Point3& p) const { return rotation_ * p + translation_; }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Projects an arbitrary 3x3 matrix to the closest rotation (SVD).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

PointCloud apply(const RigidTransform& t, const PointCloud& pc);
RigidTransform inverse(const RigidTransform& t);
/// compose(a, b) applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Isotropic rotation error in degrees, in [0, 180].
double rotation_error(const RigidTransform& a, const RigidTransform& b);
/// L2 translation error in meters.
double translation_error(const RigidTransform& a, const RigidTransform& b);

/// Least-squares rigid fit (Kabsch/Umeyama without scale) of dst ~ R src + t.
/// Throws DegenerateInput for fewer than 3 pairs or a rank-deficient (collinear) set.
RigidTransform fit_rigid(std::span<const Point3> src, std::span<const Point3> dst);

}  // namespace svc
