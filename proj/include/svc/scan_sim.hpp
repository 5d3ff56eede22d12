#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/metrics.hpp"

namespace svc {

struct Triangle {
  Point3 a, b, c;
  double area() const { return 0.5 * (b - a).cross(c - a).norm(); }
};

/// Static triangle soup. Facets with area <= 1e-9 m^2 are rejected.
class Scene {
 public:
  Scene() = default;
  explicit Scene(std::uint64_t seed) : seed_(seed) {}

  void add_triangle(const Triangle& t);
  /// Quad a-b-c-d (in order around the boundary) as two facets.
  void add_quad(const Point3& a, const Point3& b, const Point3& c, const Point3& d);
  /// Axis-aligned box; the bottom face is omitted when open_bottom is set.
  void add_box(const Point3& lo, const Point3& hi, bool open_bottom = false);

  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::uint64_t seed() const { return seed_; }
  bool empty() const { return triangles_.empty(); }

 private:
  std::vector<Triangle> triangles_;
  std::uint64_t seed_ = 0;
};

struct RoomOptions {
  int min_walls = 5, max_walls = 8;
  double min_semi_axis = 2.0, max_semi_axis = 4.0;  // meters, of the ellipse carrying the corners
  double height = 3.0;
  int min_boxes = 0, max_boxes = 0;  // free-standing boxes on the floor
};

/// Closed room with a convex polygonal floor plan (corners on a random
/// ellipse), flat floor and ceiling, and optional boxes standing on the
/// floor. World frame is z-up with the floor at z = 0.
Scene make_room(std::uint64_t seed, const RoomOptions& options = {});

/// Scan grid in the sensor frame. Ray (az, el) points along
/// (sin(az) cos(el), sin(el), cos(az) cos(el)); +z is forward.
struct RaycastParams {
  int az_steps = 64;
  int el_steps = 48;
  double az_fov_deg = 60.0;  // full width, centered on +z
  double el_fov_deg = 45.0;
  double max_range = 20.0;
};

/// Closest hit per ray expressed in the sensor frame (viewpoint at the
/// origin); rays without a hit emit nothing. Throws EmptyScan.
PointCloud raycast(const Scene& scene, const RigidTransform& sensor_pose, const RaycastParams& params);

/// Greedy minimum-distance thinning in scan order: a point is kept unless a
/// kept point lies within radius, so every input point ends up within radius
/// of the output.
PointCloud thin(const PointCloud& pc, double radius);

/// Dense raycast thinned to at most max_points. The radius starts at
/// min_radius and grows (count ~ 1 / radius^2) until the cap is met.
struct ScanOptions {
  RaycastParams raycast{480, 360, 60.0, 45.0, 5.0};
  double min_radius = 0.02;
  std::size_t max_points = 5000;
};

PointCloud scan(const Scene& scene, const RigidTransform& sensor_pose, const ScanOptions& options);

struct ScanPair {
  PointCloud src;
  PointCloud dst;
  RigidTransform gt;   // src sensor frame -> dst sensor frame
  double overlap = 0;  // inlier fraction of src under gt at tau
};

/// Two scans of the same scene; gt = pose_b^-1 * pose_a.
ScanPair make_pair(const Scene& scene, const RigidTransform& pose_a, const RigidTransform& pose_b,
                   const ScanOptions& options, double tau);

/// Sensor pose at position looking along yaw (about world z) and pitch
/// (positive looks up), both radians.
RigidTransform sensor_pose(const Point3& position, double yaw, double pitch);

struct PairSamplingOptions {
  ScanOptions scan;
  RaycastParams preview{64, 48, 60.0, 45.0, 5.0};  // coarse scan used to pre-screen poses
  RoomOptions room;
  double min_overlap = 0.10;
  double max_overlap = 0.30;
  std::size_t min_points = 2000;  // per scan; sparser views (e.g. facing a near wall) are redrawn
  int max_attempts = 400;  // pose draws per room before a new room is generated
};

/// Simulates count pairs whose measured overlap lies in [min_overlap,
/// max_overlap], each in its own seeded room.
std::vector<ScanPair> simulate_pairs(std::size_t count, std::uint64_t seed, const SvcConfig& cfg,
                                     const PairSamplingOptions& options = {});

struct SimulatedCorrespondences {
  CorrespondenceSet set;
  std::vector<bool> inlier;  // ground-truth label per pair, same order as set
};

struct CorrespondenceOptions {
  double tau = 0.1;  // true partners are target points within tau of gt(p)
  /// Optional wrong motion whose consistent matches replace part of the
  /// uniform outliers (repeated-structure confusion).
  std::optional<RigidTransform> decoy;
  double decoy_ratio = 0.0;  // decoy matches per inlier
};

/// ceil(n (1 - outlier_rate)) true matches, rest mismatches, shuffled.
/// Inlier partners are the target nearest to gt(p) displaced by isotropic
/// Gaussian noise of sigma. Throws InsufficientOverlap.
SimulatedCorrespondences make_correspondences(const ScanPair& pair, std::size_t n, double outlier_rate,
                                              double noise_sigma, std::uint64_t seed,
                                              const CorrespondenceOptions& options = {});

/// Target points guaranteed to be counted as blocked by the constraint: at
/// least one transformed non-overlap source direction lies strictly inside
/// the same-sight cone and every one inside the cone is closer by more than tau.
/// Uses a spherical hash grid, independent of the kd-tree search.
std::size_t guaranteed_blockers(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                                const SvcConfig& cfg);

struct DecisionSample {
  std::size_t pair = 0;  // index into the pair list
  RigidTransform transform;
  bool positive = false;
};

struct DecisionOptions {
  double positive_max_rotation_deg = 1.0;
  double positive_max_translation = 0.03;
  double success_rotation_deg = 15.0;
  double success_translation = 0.30;
  double negative_max_rotation_deg = 180.0;
  double negative_max_translation = 3.0;
  /// Minimum guaranteed forward blockers for a negative, as a multiple of
  /// ceil(eta2 * |dst|); 0 disables the requirement.
  double planted_blocker_factor = 0.0;
  int max_attempts = 300;  // per requested negative
};

struct DecisionBenchmark {
  std::vector<DecisionSample> samples;
  std::vector<std::size_t> skipped_pairs;  // NegativeSamplingFailed
  std::vector<std::string> skip_reasons;
};

/// One positive and negatives_per_pair admissible-range wrong motions per pair.
DecisionBenchmark make_decision_benchmark(const std::vector<ScanPair>& pairs, std::size_t negatives_per_pair,
                                          const SvcConfig& cfg, std::uint64_t seed,
                                          const DecisionOptions& options = {});

/// Seeds for independent streams (pair i of a run seeded with s).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace svc
