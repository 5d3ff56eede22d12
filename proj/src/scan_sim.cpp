#include "svc/scan_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

#include "svc/error.hpp"
#include "svc/spatial_index.hpp"
#include "svc/svc.hpp"

namespace svc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Box {
  Point3 lo, hi;
};

struct RoomLayout {
  std::vector<Eigen::Vector2d> corners;  // counter-clockwise
  double height = 0;
  std::vector<Box> boxes;
};

// Smallest signed distance from p to the walls; positive inside.
double inset(const RoomLayout& room, const Eigen::Vector2d& p) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = room.corners.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = room.corners[i];
    const Eigen::Vector2d e = (room.corners[(i + 1) % n] - a).normalized();
    const Eigen::Vector2d inward(-e.y(), e.x());
    best = std::min(best, inward.dot(p - a));
  }
  return best;
}

RoomLayout room_layout(std::uint64_t seed, const RoomOptions& o) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  RoomLayout room;
  room.height = o.height;
  const double ax = uniform(o.min_semi_axis, o.max_semi_axis);
  const double ay = uniform(o.min_semi_axis, o.max_semi_axis);
  const int walls = std::uniform_int_distribution<int>(o.min_walls, o.max_walls)(rng);
  // Corners on an ellipse, jittered around evenly spaced angles: always convex.
  const double phase = uniform(0.0, 2 * std::numbers::pi);
  const double step = 2 * std::numbers::pi / walls;
  for (int i = 0; i < walls; ++i) {
    const double a = phase + i * step + uniform(-0.3, 0.3) * step;
    room.corners.emplace_back(ax * std::cos(a), ay * std::sin(a));
  }
  const int boxes = o.max_boxes > 0 ? std::uniform_int_distribution<int>(o.min_boxes, o.max_boxes)(rng) : 0;
  for (int i = 0, tries = 0; i < boxes && tries < 1000; ++tries) {
    const double sx = uniform(0.4, 1.2);
    const double sy = uniform(0.4, 1.2);
    const double sz = uniform(0.4, 2.0);
    const Eigen::Vector2d c(uniform(-ax, ax), uniform(-ay, ay));
    bool fits = true;
    for (double dx : {-sx / 2, sx / 2}) {
      for (double dy : {-sy / 2, sy / 2}) fits = fits && inset(room, c + Eigen::Vector2d(dx, dy)) > 0.05;
    }
    if (!fits) continue;
    room.boxes.push_back({Point3(c.x() - sx / 2, c.y() - sy / 2, 0.0), Point3(c.x() + sx / 2, c.y() + sy / 2, sz)});
    ++i;
  }
  return room;
}

Scene scene_from(const RoomLayout& room, std::uint64_t seed) {
  Scene scene(seed);
  const std::size_t n = room.corners.size();
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (const auto& c : room.corners) center += c;
  center /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = room.corners[i];
    const Eigen::Vector2d& b = room.corners[(i + 1) % n];
    for (double z : {0.0, room.height}) {
      scene.add_triangle({Point3(center.x(), center.y(), z), Point3(a.x(), a.y(), z), Point3(b.x(), b.y(), z)});
    }
    scene.add_quad(Point3(a.x(), a.y(), 0), Point3(b.x(), b.y(), 0), Point3(b.x(), b.y(), room.height),
                   Point3(a.x(), a.y(), room.height));
  }
  for (const auto& b : room.boxes) scene.add_box(b.lo, b.hi, /*open_bottom=*/true);
  return scene;
}

// Möller-Trumbore, two-sided. Returns the ray parameter or +inf.
double intersect(const Point3& origin, const Point3& dir, const Triangle& tri) {
  constexpr double kEps = 1e-12;
  const Point3 e1 = tri.b - tri.a;
  const Point3 e2 = tri.c - tri.a;
  const Point3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < kEps) return std::numeric_limits<double>::infinity();
  const double inv = 1.0 / det;
  const Point3 s = origin - tri.a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::numeric_limits<double>::infinity();
  const Point3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::numeric_limits<double>::infinity();
  const double t = e2.dot(q) * inv;
  return t > kEps ? t : std::numeric_limits<double>::infinity();
}

bool valid_sensor_position(const RoomLayout& room, const Point3& p) {
  if (inset(room, p.head<2>()) < 0.6) return false;
  for (const auto& b : room.boxes) {
    constexpr double margin = 0.4;
    if (p.x() > b.lo.x() - margin && p.x() < b.hi.x() + margin && p.y() > b.lo.y() - margin &&
        p.y() < b.hi.y() + margin && p.z() < b.hi.z() + margin) {
      return false;
    }
  }
  return true;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point3 axis(normal(rng), normal(rng), normal(rng));
  if (axis.norm() < 1e-12) axis = Point3::UnitZ();
  const double angle = std::uniform_real_distribution<double>(0.0, max_angle)(rng);
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Point3 random_offset(std::mt19937_64& rng, double max_norm) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point3 dir(normal(rng), normal(rng), normal(rng));
  if (dir.norm() < 1e-12) dir = Point3::UnitX();
  return dir.normalized() * std::uniform_real_distribution<double>(0.0, max_norm)(rng);
}

}  // namespace

void Scene::add_triangle(const Triangle& t) {
  if (!is_finite(t.a) || !is_finite(t.b) || !is_finite(t.c) || !(t.area() > 1e-9)) {
    throw Error(ErrorCode::InvalidArgument, "degenerate scene facet");
  }
  triangles_.push_back(t);
}

void Scene::add_quad(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
  add_triangle({a, b, c});
  add_triangle({a, c, d});
}

void Scene::add_box(const Point3& lo, const Point3& hi, bool open_bottom) {
  const Point3 p000(lo.x(), lo.y(), lo.z()), p100(hi.x(), lo.y(), lo.z());
  const Point3 p010(lo.x(), hi.y(), lo.z()), p110(hi.x(), hi.y(), lo.z());
  const Point3 p001(lo.x(), lo.y(), hi.z()), p101(hi.x(), lo.y(), hi.z());
  const Point3 p011(lo.x(), hi.y(), hi.z()), p111(hi.x(), hi.y(), hi.z());
  if (!open_bottom) add_quad(p000, p100, p110, p010);
  add_quad(p001, p101, p111, p011);
  add_quad(p000, p100, p101, p001);
  add_quad(p010, p110, p111, p011);
  add_quad(p000, p010, p011, p001);
  add_quad(p100, p110, p111, p101);
}

Scene make_room(std::uint64_t seed, const RoomOptions& options) {
  return scene_from(room_layout(seed, options), seed);
}

PointCloud raycast(const Scene& scene, const RigidTransform& sensor_pose, const RaycastParams& params) {
  if (params.az_steps < 8 || params.el_steps < 8) {
    throw Error(ErrorCode::InvalidArgument, "raycast needs at least 8 steps per axis");
  }
  if (!(params.max_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_range must be > 0");

  const double az_span = params.az_fov_deg * kDeg;
  const double el_span = params.el_fov_deg * kDeg;
  const Point3 origin = sensor_pose.translation();
  std::vector<Point3> points;
  points.reserve(static_cast<std::size_t>(params.az_steps) * params.el_steps);

  for (int ie = 0; ie < params.el_steps; ++ie) {
    const double el = -el_span / 2 + (ie + 0.5) * el_span / params.el_steps;
    for (int ia = 0; ia < params.az_steps; ++ia) {
      const double az = -az_span / 2 + (ia + 0.5) * az_span / params.az_steps;
      const Point3 local(std::sin(az) * std::cos(el), std::sin(el), std::cos(az) * std::cos(el));
      const Point3 dir = sensor_pose.rotation() * local;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& tri : scene.triangles()) best = std::min(best, intersect(origin, dir, tri));
      if (best <= params.max_range) points.push_back(local * best);
    }
  }
  if (points.empty()) throw Error(ErrorCode::EmptyScan, "no ray hit the scene");
  return PointCloud(std::move(points), Point3::Zero());
}

PointCloud thin(const PointCloud& pc, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "thinning radius must be > 0");
  // Cells of edge radius: any kept point within radius sits in the 27 neighbors.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  grid.reserve(pc.size());
  auto key_of = [](std::int64_t x, std::int64_t y, std::int64_t z) {
    return (static_cast<std::uint64_t>(x + (1 << 20)) << 42) | (static_cast<std::uint64_t>(y + (1 << 20)) << 21) |
           static_cast<std::uint64_t>(z + (1 << 20));
  };
  const double r2 = radius * radius;
  std::vector<Point3> kept;
  for (const auto& p : pc.points()) {
    const Point3 c = (p / radius).array().floor();
    const auto cx = static_cast<std::int64_t>(c.x());
    const auto cy = static_cast<std::int64_t>(c.y());
    const auto cz = static_cast<std::int64_t>(c.z());
    bool covered = false;
    for (std::int64_t dx = -1; dx <= 1 && !covered; ++dx) {
      for (std::int64_t dy = -1; dy <= 1 && !covered; ++dy) {
        for (std::int64_t dz = -1; dz <= 1 && !covered; ++dz) {
          const auto it = grid.find(key_of(cx + dx, cy + dy, cz + dz));
          if (it == grid.end()) continue;
          for (std::size_t k : it->second) {
            if ((kept[k] - p).squaredNorm() <= r2) {
              covered = true;
              break;
            }
          }
        }
      }
    }
    if (covered) continue;
    grid[key_of(cx, cy, cz)].push_back(kept.size());
    kept.push_back(p);
  }
  return PointCloud(std::move(kept), pc.viewpoint());
}

PointCloud scan(const Scene& scene, const RigidTransform& pose, const ScanOptions& options) {
  const PointCloud dense = raycast(scene, pose, options.raycast);
  double radius = options.min_radius;
  PointCloud sampled = thin(dense, radius);
  while (sampled.size() > options.max_points) {
    const double ratio = static_cast<double>(sampled.size()) / (0.97 * static_cast<double>(options.max_points));
    radius *= std::max(1.01, std::sqrt(ratio));
    sampled = thin(dense, radius);
  }
  return sampled;
}

ScanPair make_pair(const Scene& scene, const RigidTransform& pose_a, const RigidTransform& pose_b,
                   const ScanOptions& options, double tau) {
  ScanPair pair;
  pair.src = scan(scene, pose_a, options);
  pair.dst = scan(scene, pose_b, options);
  pair.gt = compose(inverse(pose_b), pose_a);
  const NNIndex dst_index = NNIndex::build(pair.dst.points());
  pair.overlap = overlap_fraction(pair.src, dst_index, pair.gt, tau);
  return pair;
}

RigidTransform sensor_pose(const Point3& position, double yaw, double pitch) {
  const Point3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), std::sin(pitch));
  const Point3 up_hint = Point3::UnitZ();
  const Point3 left = up_hint.cross(forward).normalized();
  const Point3 up = forward.cross(left);
  Eigen::Matrix3d r;
  r.col(0) = left;
  r.col(1) = up;
  r.col(2) = forward;
  return RigidTransform(nearest_rotation(r), position);
}

std::vector<ScanPair> simulate_pairs(std::size_t count, std::uint64_t seed, const SvcConfig& cfg,
                                     const PairSamplingOptions& options) {
  std::vector<ScanPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t pair_seed = derive_seed(seed, i);
    std::mt19937_64 rng(pair_seed);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    bool done = false;
    for (std::uint64_t room_id = 0; !done; ++room_id) {
      if (room_id > 64) throw Error(ErrorCode::InsufficientOverlap, "could not hit the requested overlap band");
      const std::uint64_t room_seed = derive_seed(pair_seed, room_id);
      const RoomLayout room = room_layout(room_seed, options.room);
      const Scene scene = scene_from(room, room_seed);
      double max_extent = 0.0;
      for (const auto& c : room.corners) max_extent = std::max(max_extent, c.cwiseAbs().maxCoeff());

      for (int attempt = 0; attempt < options.max_attempts && !done; ++attempt) {
        const Point3 pa(uniform(-max_extent, max_extent), uniform(-max_extent, max_extent), uniform(1.2, 1.8));
        if (!valid_sensor_position(room, pa)) continue;
        const double yaw_a = uniform(-std::numbers::pi, std::numbers::pi);
        const double pitch_a = uniform(-25.0, -5.0) * kDeg;
        const double heading = uniform(-std::numbers::pi, std::numbers::pi);
        const double dist = uniform(0.3, 2.0);
        const Point3 pb = pa + Point3(dist * std::cos(heading), dist * std::sin(heading), uniform(-0.2, 0.2));
        if (!valid_sensor_position(room, pb)) continue;
        const double sign = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
        const double yaw_b = yaw_a + sign * uniform(25.0, 70.0) * kDeg;
        const double pitch_b = uniform(-25.0, -5.0) * kDeg;
        const RigidTransform pose_a = sensor_pose(pa, yaw_a, pitch_a);
        const RigidTransform pose_b = sensor_pose(pb, yaw_b, pitch_b);
        try {
          // Cheap coarse screen before the dense scans.
          const PointCloud coarse_a = raycast(scene, pose_a, options.preview);
          const PointCloud coarse_b = raycast(scene, pose_b, options.preview);
          const NNIndex coarse_index = NNIndex::build(coarse_b.points());
          const double rough = overlap_fraction(coarse_a, coarse_index, compose(inverse(pose_b), pose_a), cfg.tau);
          if (rough < options.min_overlap - 0.05 || rough > options.max_overlap + 0.05) continue;
          ScanPair pair = make_pair(scene, pose_a, pose_b, options.scan, cfg.tau);
          const bool dense = std::min(pair.src.size(), pair.dst.size()) >= options.min_points;
          if (dense && pair.overlap >= options.min_overlap && pair.overlap <= options.max_overlap) {
            pairs.push_back(std::move(pair));
            done = true;
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyScan) throw;
        }
      }
    }
  }
  return pairs;
}

SimulatedCorrespondences make_correspondences(const ScanPair& pair, std::size_t n, double outlier_rate,
                                              double noise_sigma, std::uint64_t seed,
                                              const CorrespondenceOptions& options) {
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "outlier_rate must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
  std::mt19937_64 rng(seed);
  const NNIndex dst_index = NNIndex::build(pair.dst.points());

  // The 1e-9 guard keeps n * 0.05 = 50.000000001 from rounding up to 51.
  const auto n_inliers =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - outlier_rate) - 1e-9));
  std::vector<std::size_t> overlap_src;
  for (std::size_t i = 0; i < pair.src.size(); ++i) {
    if (dst_index.nearest(pair.gt(pair.src[i])).distance < options.tau) overlap_src.push_back(i);
  }
  if (overlap_src.size() < n_inliers) {
    throw Error(ErrorCode::InsufficientOverlap, "overlap has " + std::to_string(overlap_src.size()) +
                                                    " points, " + std::to_string(n_inliers) + " inliers requested");
  }
  std::shuffle(overlap_src.begin(), overlap_src.end(), rng);

  std::vector<Correspondence> pairs;
  std::vector<bool> labels;
  std::vector<std::uint8_t> used_src(pair.src.size(), 0);
  auto try_add = [&](std::size_t s, std::size_t d, bool inlier) {
    for (const auto& c : pairs) {
      if (c.src == s && c.dst == d) return false;
    }
    pairs.push_back({s, d, std::nullopt});
    labels.push_back(inlier);
    return true;
  };

  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  for (std::size_t k = 0; k < overlap_src.size() && labels.size() < n_inliers; ++k) {
    const std::size_t s = overlap_src[k];
    Point3 target = pair.gt(pair.src[s]);
    if (noise_sigma > 0) target += Point3(noise(rng), noise(rng), noise(rng));
    if (try_add(s, dst_index.nearest(target).index, true)) used_src[s] = 1;
  }
  if (labels.size() < n_inliers) throw Error(ErrorCode::InsufficientOverlap, "not enough distinct inlier matches");

  const std::size_t n_outliers = n - n_inliers;
  std::size_t n_decoy = 0;
  if (options.decoy && options.decoy_ratio > 0.0) {
    n_decoy = std::min(n_outliers, static_cast<std::size_t>(std::llround(options.decoy_ratio * n_inliers)));
  }
  if (n_decoy > 0) {
    std::vector<std::size_t> order(pair.src.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t added = 0;
    for (std::size_t s : order) {
      if (added == n_decoy) break;
      const Point3 moved = (*options.decoy)(pair.src[s]);
      const Neighbor nn = dst_index.nearest(moved);
      if (nn.distance >= options.tau) continue;
      if ((pair.gt(pair.src[s]) - pair.dst[nn.index]).norm() < options.tau) continue;  // would be a true match
      if (try_add(s, nn.index, false)) ++added;
    }
    n_decoy = added;
  }

  std::uniform_int_distribution<std::size_t> pick_src(0, pair.src.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_dst(0, pair.dst.size() - 1);
  std::size_t guard = 0;
  while (labels.size() < n) {
    if (++guard > 1000 * n + 1000) throw Error(ErrorCode::InvalidArgument, "cannot draw enough distinct outliers");
    const std::size_t s = pick_src(rng);
    const std::size_t d = pick_dst(rng);
    if ((pair.gt(pair.src[s]) - pair.dst[d]).norm() < options.tau) continue;
    try_add(s, d, false);
  }

  std::vector<std::size_t> perm(pairs.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  SimulatedCorrespondences out;
  std::vector<Correspondence> shuffled;
  shuffled.reserve(pairs.size());
  for (std::size_t i : perm) {
    shuffled.push_back(pairs[i]);
    out.inlier.push_back(labels[i]);
  }
  out.set = CorrespondenceSet(std::move(shuffled));
  return out;
}

std::size_t guaranteed_blockers(const PointCloud& src, const PointCloud& dst, const RigidTransform& t,
                                const SvcConfig& cfg) {
  const NNIndex dst_index = NNIndex::build(dst.points());
  const PointCloud occluders = non_overlap(src, t, dst_index, cfg.tau);
  if (occluders.empty()) return 0;
  const Point3& sensor = dst.viewpoint();

  // Unit vectors inside the cone of a query are within this chord of it, so
  // the 27 cells around the query cell cover the whole cone.
  const double cell = std::sqrt(2.0 - 2.0 * cfg.t_threshold);
  auto key_of = [](long x, long y, long z) {
    return (static_cast<std::uint64_t>(x + (1 << 20)) << 42) | (static_cast<std::uint64_t>(y + (1 << 20)) << 21) |
           static_cast<std::uint64_t>(z + (1 << 20));
  };
  auto cell_of = [cell](double v) { return static_cast<long>(std::floor(v / cell)); };

  struct Entry {
    Point3 dir;
    double range;
  };
  std::unordered_map<std::uint64_t, std::vector<Entry>> grid;
  for (const auto& p : occluders.points()) {
    const Point3 ray = p - sensor;
    const double r = ray.norm();
    if (r < cfg.min_range || r == 0.0) continue;
    const Point3 u = ray / r;
    grid[key_of(cell_of(u.x()), cell_of(u.y()), cell_of(u.z()))].push_back({u, r});
  }

  constexpr double kMargin = 1e-12;
  std::size_t count = 0;
  for (const auto& q : dst.points()) {
    const Point3 ray = q - sensor;
    const double rq = ray.norm();
    if (rq < cfg.min_range || rq == 0.0) continue;
    const Point3 u = ray / rq;
    const long cx = cell_of(u.x()), cy = cell_of(u.y()), cz = cell_of(u.z());
    bool any_inside = false;
    bool all_closer = true;
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(key_of(cx + dx, cy + dy, cz + dz));
          if (it == grid.end()) continue;
          for (const auto& e : it->second) {
            const double dot = e.dir.dot(u);
            if (dot > cfg.t_threshold + kMargin) any_inside = true;
            if (dot > cfg.t_threshold - kMargin && !(rq - e.range > cfg.tau + kMargin)) all_closer = false;
          }
        }
      }
    }
    if (any_inside && all_closer) ++count;
  }
  return count;
}

namespace {

// Cheap screen on a strided subset; candidates far below the range threshold
// are dropped before the exact test.
bool likely_in_range(const PointCloud& src, const NNIndex& dst_index, const RigidTransform& t, const SvcConfig& cfg) {
  constexpr std::size_t kProbe = 256;
  if (src.size() <= 4 * kProbe) return true;
  const std::size_t stride = src.size() / kProbe;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < kProbe; ++i) {
    if (dst_index.nearest(t(src[i * stride])).distance < cfg.tau) ++hits;
  }
  return static_cast<double>(hits) >= 0.5 * cfg.eta1 * static_cast<double>(kProbe);
}

}  // namespace

DecisionBenchmark make_decision_benchmark(const std::vector<ScanPair>& pairs, std::size_t negatives_per_pair,
                                          const SvcConfig& cfg, std::uint64_t seed, const DecisionOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "decision benchmark needs at least one pair");
  cfg.validate();
  DecisionBenchmark bench;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ScanPair& pair = pairs[i];
    std::mt19937_64 rng(derive_seed(seed, i));

    RigidTransform positive;
    do {
      const Eigen::Matrix3d dr = random_rotation(rng, options.positive_max_rotation_deg * kDeg);
      const Point3 dt = random_offset(rng, options.positive_max_translation);
      positive = RigidTransform(nearest_rotation(dr * pair.gt.rotation()), pair.gt.translation() + dt);
    } while (!(rotation_error(positive, pair.gt) < options.success_rotation_deg &&
               translation_error(positive, pair.gt) < options.success_translation));

    std::vector<RigidTransform> negatives;
    if (negatives_per_pair > 0) {
      const NNIndex dst_index = NNIndex::build(pair.dst.points());
      Point3 center = Point3::Zero();
      for (const auto& p : pair.src.points()) center += pair.gt(p);
      center /= static_cast<double>(pair.src.size());
      const auto budget = static_cast<std::size_t>(std::ceil(cfg.eta2 * static_cast<double>(pair.dst.size())));
      const double needed = options.planted_blocker_factor * static_cast<double>(budget);

      const int max_attempts = options.max_attempts * static_cast<int>(negatives_per_pair);
      for (int attempt = 0; attempt < max_attempts && negatives.size() < negatives_per_pair; ++attempt) {
        // Wrong motion applied in the target frame about the overlap centroid.
        const Eigen::Matrix3d dr = random_rotation(rng, options.negative_max_rotation_deg * kDeg);
        const Point3 dt = random_offset(rng, options.negative_max_translation);
        const RigidTransform perturb(dr, center - dr * center + dt);
        const RigidTransform candidate = compose(perturb, pair.gt);
        if (rotation_error(candidate, pair.gt) < options.success_rotation_deg &&
            translation_error(candidate, pair.gt) < options.success_translation) {
          continue;
        }
        if (!likely_in_range(pair.src, dst_index, candidate, cfg)) continue;
        if (!in_range(pair.src, dst_index, candidate, cfg)) continue;
        if (needed > 0 && static_cast<double>(guaranteed_blockers(pair.src, pair.dst, candidate, cfg)) < needed) {
          continue;
        }
        negatives.push_back(candidate);
      }
      if (negatives.size() < negatives_per_pair) {
        bench.skipped_pairs.push_back(i);
        bench.skip_reasons.push_back("pair " + std::to_string(i) + ": found " + std::to_string(negatives.size()) +
                                     " of " + std::to_string(negatives_per_pair) + " admissible negatives");
        continue;
      }
    }
    bench.samples.push_back({i, positive, true});
    for (const auto& n : negatives) bench.samples.push_back({i, n, false});
  }
  if (bench.samples.empty()) {
    throw Error(ErrorCode::NegativeSamplingFailed, "no pair produced the requested negatives");
  }
  return bench;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over a combined state
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace svc
