#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "svc/error.hpp"
#include "svc/geometry.hpp"

using svc::ErrorCode;
using svc::Point3;
using svc::PointCloud;
using svc::RigidTransform;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

RigidTransform rot(const Point3& axis, double deg) { return RigidTransform::from_axis_angle(axis, deg * kDeg); }

}  // namespace

TEST(RigidTransform, RejectsReflectionAndNonOrthonormal) {
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1;
  EXPECT_EQ(code_of([&] { RigidTransform(reflect, Point3::Zero()); }), ErrorCode::InvalidRotation);
  Eigen::Matrix3d scaled = 1.01 * Eigen::Matrix3d::Identity();
  EXPECT_EQ(code_of([&] { RigidTransform(scaled, Point3::Zero()); }), ErrorCode::InvalidRotation);
  EXPECT_EQ(code_of([&] { RigidTransform(Eigen::Matrix3d::Identity(), Point3(NAN, 0, 0)); }),
            ErrorCode::InvalidRotation);
}

TEST(PointCloud, RejectsNonFinitePoints) {
  EXPECT_THROW(PointCloud({Point3(0, INFINITY, 0)}), svc::Error);
  EXPECT_THROW(PointCloud({Point3(0, 0, 0)}, Point3(NAN, 0, 0)), svc::Error);
}

TEST(Apply, IdentityKeepsCloud) {
  std::mt19937_64 rng(1);
  const PointCloud pc(oracle::random_points(rng, 50, 3.0), Point3(0.5, -1, 2));
  const PointCloud out = svc::apply(RigidTransform::identity(), pc);
  ASSERT_EQ(out.size(), pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) EXPECT_EQ(out[i], pc[i]);
  EXPECT_EQ(out.viewpoint(), pc.viewpoint());
}

TEST(Apply, PureTranslation) {
  const RigidTransform t(Eigen::Matrix3d::Identity(), Point3(1, 0, 0));
  const PointCloud out = svc::apply(t, PointCloud({Point3(0, 0, 0)}));
  EXPECT_EQ(out[0], Point3(1, 0, 0));
  EXPECT_EQ(out.viewpoint(), Point3(1, 0, 0));
}

TEST(Apply, AxisRotation) {
  const PointCloud out = svc::apply(rot(Point3::UnitZ(), 90), PointCloud({Point3(1, 0, 0)}));
  EXPECT_NEAR(out[0].x(), 0.0, 1e-12);
  EXPECT_NEAR(out[0].y(), 1.0, 1e-12);
  EXPECT_NEAR(out[0].z(), 0.0, 1e-12);
}

TEST(Inverse, PureTranslation) {
  const RigidTransform inv = svc::inverse(RigidTransform(Eigen::Matrix3d::Identity(), Point3(1, 2, 3)));
  EXPECT_TRUE(inv.rotation().isApprox(Eigen::Matrix3d::Identity()));
  EXPECT_EQ(inv.translation(), Point3(-1, -2, -3));
}

TEST(Inverse, IdentityIsSelfInverse) {
  const RigidTransform inv = svc::inverse(RigidTransform::identity());
  EXPECT_EQ(inv.matrix(), Eigen::Matrix4d::Identity());
}

TEST(Inverse, RoundTripOnRandomPoints) {
  std::mt19937_64 rng(2);
  const RigidTransform t = oracle::random_transform(rng);
  const RigidTransform inv = svc::inverse(t);
  for (const auto& p : oracle::random_points(rng, 100, 10.0)) EXPECT_LT((inv(t(p)) - p).norm(), 1e-9);
  const Eigen::Matrix4d prod = svc::compose(t, inv).matrix();
  EXPECT_LT((prod - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Compose, AppliesRightOperandFirst) {
  const RigidTransform a = rot(Point3::UnitZ(), 90);
  const RigidTransform b(Eigen::Matrix3d::Identity(), Point3(1, 0, 0));
  const Point3 p = svc::compose(a, b)(Point3::Zero());
  EXPECT_NEAR(p.x(), 0.0, 1e-12);
  EXPECT_NEAR(p.y(), 1.0, 1e-12);
}

TEST(FromMatrix, RejectsBadLastRow) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(3, 0) = 0.5;
  EXPECT_EQ(code_of([&] { RigidTransform::from_matrix(m); }), ErrorCode::InvalidRotation);
}

TEST(RotationError, IdenticalIsZero) {
  const RigidTransform a = rot(Point3(1, 2, 3), 37);
  EXPECT_NEAR(svc::rotation_error(a, a), 0.0, 1e-6);
}

TEST(RotationError, SingleAxis) {
  EXPECT_NEAR(svc::rotation_error(rot(Point3::UnitZ(), 10), RigidTransform::identity()), 10.0, 1e-6);
}

TEST(RotationError, ComposedAxesMatchQuaternionAngle) {
  // Geodesic angles of Rx(a) Rz(b), computed independently from quaternions.
  const RigidTransform r1 = svc::compose(rot(Point3::UnitX(), 30), rot(Point3::UnitZ(), 40));
  EXPECT_NEAR(svc::rotation_error(r1, RigidTransform::identity()), 49.62843380918456, 1e-6);
  const RigidTransform r2 = svc::compose(rot(Point3::UnitX(), -70), rot(Point3::UnitZ(), 125));
  EXPECT_NEAR(svc::rotation_error(r2, RigidTransform::identity()), 135.55029927207826, 1e-6);
}

TEST(RotationError, HalfTurnStaysFinite) {
  const double e = svc::rotation_error(rot(Point3::UnitY(), 180), RigidTransform::identity());
  EXPECT_FALSE(std::isnan(e));
  EXPECT_NEAR(e, 180.0, 1e-6);
}

TEST(RotationError, SymmetricAndTriangleInequality) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = oracle::random_transform(rng), b = oracle::random_transform(rng), c = oracle::random_transform(rng);
    const double ab = svc::rotation_error(a, b);
    EXPECT_NEAR(ab, svc::rotation_error(b, a), 1e-6);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 180.0);
    EXPECT_LE(svc::rotation_error(a, c), ab + svc::rotation_error(b, c) + 1e-6);
  }
}

TEST(TranslationError, Basics) {
  const RigidTransform a = RigidTransform::identity();
  const RigidTransform b(Eigen::Matrix3d::Identity(), Point3(0, 3, 4));
  EXPECT_EQ(svc::translation_error(a, a), 0.0);
  EXPECT_NEAR(svc::translation_error(a, b), 5.0, 1e-12);
}

TEST(TranslationError, MatchesComponentFormula) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto a = oracle::random_transform(rng), b = oracle::random_transform(rng);
    const Point3 d = a.translation() - b.translation();
    EXPECT_NEAR(svc::translation_error(a, b), std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()), 1e-12);
  }
}

TEST(RigidMotion, PreservesDistances) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto t = oracle::random_transform(rng);
    const auto pts = oracle::random_points(rng, 2, 10.0);
    EXPECT_NEAR((t(pts[0]) - t(pts[1])).norm(), (pts[0] - pts[1]).norm(), 1e-9);
  }
}

TEST(FitRigid, RecoversSampledTransform) {
  std::mt19937_64 rng(6);
  const auto t = oracle::random_transform(rng);
  const auto src = oracle::random_points(rng, 3, 2.0);
  std::vector<Point3> dst;
  for (const auto& p : src) dst.push_back(t(p));
  const auto fit = svc::fit_rigid(src, dst);
  EXPECT_LT((fit.rotation() - t.rotation()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((fit.translation() - t.translation()).norm(), 1e-9);
}

TEST(FitRigid, ExactOnThousandNoiselessTriples) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto t = oracle::random_transform(rng);
    const auto src = oracle::random_points(rng, 3, 2.0);
    std::vector<Point3> dst;
    for (const auto& p : src) dst.push_back(t(p));
    const auto fit = svc::fit_rigid(src, dst);
    for (std::size_t k = 0; k < 3; ++k) ASSERT_LT((fit(src[k]) - dst[k]).norm(), 1e-9) << "instance " << i;
  }
}

TEST(FitRigid, IdenticalSetsGiveIdentity) {
  const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto fit = svc::fit_rigid(pts, pts);
  EXPECT_LT((fit.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitRigid, DegenerateInputs) {
  const std::vector<Point3> collinear{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  EXPECT_EQ(code_of([&] { svc::fit_rigid(collinear, collinear); }), ErrorCode::DegenerateInput);
  const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(code_of([&] { svc::fit_rigid(two, two); }), ErrorCode::DegenerateInput);
  const std::vector<Point3> three{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  EXPECT_EQ(code_of([&] { svc::fit_rigid(three, two); }), ErrorCode::InvalidArgument);
}

TEST(FitRigid, NeverReturnsReflection) {
  // A mirrored target set has no proper rigid fit; the result must still be a rotation.
  const std::vector<Point3> src{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  std::vector<Point3> dst;
  for (const auto& p : src) dst.push_back(Point3(p.x(), p.y(), -p.z()));
  const auto fit = svc::fit_rigid(src, dst);
  EXPECT_NEAR(fit.rotation().determinant(), 1.0, 1e-9);
}
