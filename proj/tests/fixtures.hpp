// Hand-built scenes with known occlusion structure.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/metrics.hpp"

namespace fixture {

using svc::Point3;

// 21 x 21 grid on the plane z = 2 seen from the origin.
inline std::vector<Point3> wall() {
  std::vector<Point3> pts;
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) pts.push_back(Point3(0.05 * i, 0.05 * j, 2.0));
  }
  return pts;
}

// The central wall patch (|x|, |y| <= 0.25).
inline std::vector<Point3> patch() {
  std::vector<Point3> pts;
  for (const auto& p : wall()) {
    if (std::abs(p.x()) <= 0.25 + 1e-12 && std::abs(p.y()) <= 0.25 + 1e-12) pts.push_back(p);
  }
  return pts;
}

inline svc::RigidTransform shift(const Point3& t) { return svc::RigidTransform(Eigen::Matrix3d::Identity(), t); }

// Source = central wall patch, correct motion identity. The wrong motion
// shifts the patch 1 m towards the sensor, onto the rays of wall points, and
// four target clutter points make it collect more correspondence support.
struct Planted {
  svc::PointCloud src, dst;
  svc::CorrespondenceSet corr;
  svc::RigidTransform right = svc::RigidTransform::identity();
  svc::RigidTransform wrong = shift(Point3(0, 0, -1));

  Planted() {
    const auto p = patch();
    std::vector<Point3> d = wall();
    src = svc::PointCloud(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::abs(std::abs(p[i].x()) - 0.25) < 1e-12 && std::abs(std::abs(p[i].y()) - 0.25) < 1e-12) {
        d.push_back(wrong(p[i]));
        corr.add({i, d.size() - 1, std::nullopt});
      }
    }
    for (std::size_t i : {60u, 61u, 72u}) {  // patch points matched onto themselves
      const auto it = std::find(d.begin(), d.end(), p[i]);
      corr.add({i, static_cast<std::size_t>(it - d.begin()), std::nullopt});
    }
    dst = svc::PointCloud(d);
  }
};

}  // namespace fixture
