#include "svc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svc/error.hpp"

namespace svc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotUnitNorm: return "NotUnitNorm";
    case ErrorCode::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::AllPointsDegenerate: return "AllPointsDegenerate";
    case ErrorCode::EmptyHypotheses: return "EmptyHypotheses";
    case ErrorCode::TooFewCorrespondences: return "TooFewCorrespondences";
    case ErrorCode::NoValidHypothesis: return "NoValidHypothesis";
    case ErrorCode::EmptyScan: return "EmptyScan";
    case ErrorCode::NegativeSamplingFailed: return "NegativeSamplingFailed";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

PointCloud::PointCloud(std::vector<Point3> points, const Point3& viewpoint)
    : points_(std::move(points)), viewpoint_(viewpoint) {
  if (!is_finite(viewpoint_)) {
    throw Error(ErrorCode::InvalidArgument, "viewpoint is not finite");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " is not finite");
    }
  }
}

RigidTransform::RigidTransform()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation_.allFinite() || !translation_.allFinite()) {
    throw Error(ErrorCode::InvalidRotation, "non-finite transform entries");
  }
  const Eigen::Matrix3d gram = rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity();
  if (gram.cwiseAbs().maxCoeff() > kTolerance) {
    throw Error(ErrorCode::InvalidRotation, "rotation block is not orthonormal");
  }
  if (std::abs(rotation_.determinant() - 1.0) > kTolerance) {
    throw Error(ErrorCode::InvalidRotation, "rotation block has determinant != +1");
  }
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  const Eigen::RowVector4d last = m.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kTolerance) {
    throw Error(ErrorCode::InvalidRotation, "last row of a homogeneous transform must be 0 0 0 1");
  }
  return RigidTransform(m.block<3, 3>(0, 0), m.block<3, 1>(0, 3));
}

RigidTransform RigidTransform::from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                               const Eigen::Vector3d& translation) {
  if (axis.norm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "zero rotation axis");
  }
  return RigidTransform(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), translation);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = rotation_;
  m.block<3, 1>(0, 3) = translation_;
  return m;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

PointCloud apply(const RigidTransform& t, const PointCloud& pc) {
  std::vector<Point3> out;
  out.reserve(pc.size());
  for (const auto& p : pc.points()) out.push_back(t(p));
  return PointCloud(std::move(out), t(pc.viewpoint()));
}

RigidTransform inverse(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return RigidTransform(rt, -rt * t.translation());
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  // Renormalize so long chains of compositions keep the rotation invariants.
  return RigidTransform(nearest_rotation(a.rotation() * b.rotation()),
                        a.rotation() * b.translation() + a.translation());
}

double rotation_error(const RigidTransform& a, const RigidTransform& b) {
  const double trace = (a.rotation().transpose() * b.rotation()).trace();
  const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double translation_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

RigidTransform fit_rigid(std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::InvalidArgument, "fit_rigid: point lists differ in length");
  }
  if (src.size() < 3) {
    throw Error(ErrorCode::DegenerateInput, "fit_rigid needs at least 3 point pairs");
  }
  const double n = static_cast<double>(src.size());
  Point3 src_mean = Point3::Zero();
  Point3 dst_mean = Point3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= n;
  dst_mean /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Point3 a = src[i] - src_mean;
    const Point3 b = dst[i] - dst_mean;
    cross += a * b.transpose();
    spread += a * a.transpose();
  }

  // Collinear (or coincident) source points leave the rotation about the line undetermined.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(spread);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (ev(2) <= 0.0 || ev(1) <= 1e-12 * ev(2)) {
    throw Error(ErrorCode::DegenerateInput, "fit_rigid: source points are collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0) d(2, 2) = -1.0;
  const Eigen::Matrix3d r = nearest_rotation(v * d * u.transpose());
  return RigidTransform(r, dst_mean - r * src_mean);
}

}  // namespace svc
