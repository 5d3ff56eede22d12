#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "svc/scan_sim.hpp"
#include "svc/svc.hpp"
#include "test_util.hpp"

using svc::CorrespondenceSet;
using svc::ErrorCode;
using svc::NNIndex;
using svc::Point3;
using svc::PointCloud;
using svc::RigidTransform;
using svc::SphereProjection;
using svc::SvcConfig;
using fixture::patch;
using fixture::shift;
using fixture::wall;
using PlantedInstance = fixture::Planted;

namespace {

SphereProjection projection(const std::vector<Point3>& dirs, const std::vector<double>& ranges) {
  SphereProjection p;
  p.directions = dirs;
  p.ranges = ranges;
  for (std::size_t i = 0; i < dirs.size(); ++i) p.source_indices.push_back(i);
  return p;
}

}  // namespace

TEST(NonOverlap, IdenticalCloudsGiveEmptySet) {
  const PointCloud pc(wall());
  EXPECT_TRUE(svc::non_overlap(pc, RigidTransform::identity(), NNIndex::build(pc.points()), 0.1).empty());
}

TEST(NonOverlap, FarTranslationKeepsEveryPoint) {
  const PointCloud pc(wall(), Point3(0, 0, 0));
  const auto out = svc::non_overlap(pc, shift(Point3(0, 0, 5)), NNIndex::build(pc.points()), 0.1);
  EXPECT_EQ(out.size(), pc.size());
  EXPECT_EQ(out.viewpoint(), Point3(0, 0, 5));
}

TEST(NonOverlap, PlantedSixtyFortySplit) {
  // 60 source points lie on the target, 40 sit 0.5 m away; the margin exceeds tau.
  std::vector<Point3> dst, src;
  for (int i = 0; i < 100; ++i) dst.push_back(Point3(0.1 * i, 0, 0));
  for (int i = 0; i < 60; ++i) src.push_back(dst[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 40; ++i) src.push_back(Point3(0.1 * i, 0.5, 0));
  const auto out = svc::non_overlap(PointCloud(src), RigidTransform::identity(), NNIndex::build(dst), 0.1);
  ASSERT_EQ(out.size(), 40u);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], src[60 + i]);
}

TEST(ProjectSphere, Examples) {
  const auto p = svc::project_sphere(PointCloud({Point3(0, 0, 5), Point3(3, 4, 0)}), Point3::Zero(), 1e-6);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.directions[0], Point3(0, 0, 1));
  EXPECT_EQ(p.ranges[0], 5.0);
  EXPECT_NEAR((p.directions[1] - Point3(0.6, 0.8, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(p.ranges[1], 5.0);
}

TEST(ProjectSphere, DeadZoneExcludesSensorPoint) {
  const auto p = svc::project_sphere(PointCloud({Point3(1, 1, 1), Point3(0, 0, 2)}), Point3(1, 1, 1), 1e-6);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.source_indices[0], 1u);
  EXPECT_EQ(code_of([] { svc::project_sphere(PointCloud({Point3::Zero()}), Point3::Zero(), 1e-6); }),
            ErrorCode::AllPointsDegenerate);
  // A zero-length ray has no direction even with a zero dead zone.
  EXPECT_EQ(code_of([] { svc::project_sphere(PointCloud({Point3::Zero()}), Point3::Zero(), 0.0); }),
            ErrorCode::AllPointsDegenerate);
}

TEST(ProjectSphere, DirectionsAreUnit) {
  std::mt19937_64 rng(1);
  const auto p = svc::project_sphere(PointCloud(oracle::random_points(rng, 200, 4.0)), Point3(0.3, -0.2, 1), 1e-6);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p.directions[i].norm(), 1.0, 1e-9);
}

TEST(BlockedCount, CollinearOccluder) {
  const SvcConfig cfg;
  const auto q = projection({Point3(0, 0, 1)}, {2.0});
  EXPECT_EQ(svc::blocked_count(q, projection({Point3(0, 0, 1)}, {1.0}), cfg), 1u);
}

TEST(BlockedCount, OccluderBehindTarget) {
  const SvcConfig cfg;
  const auto q = projection({Point3(0, 0, 1)}, {2.0});
  EXPECT_EQ(svc::blocked_count(q, projection({Point3(0, 0, 1)}, {3.0}), cfg), 0u);
}

TEST(BlockedCount, OutsideSightCone) {
  const SvcConfig cfg;
  const Point3 occ(0.1, 0, 1);
  EXPECT_LT(occ.normalized().dot(Point3(0, 0, 1)), cfg.t_threshold);
  const auto q = projection({Point3(0, 0, 1)}, {2.0});
  EXPECT_EQ(svc::blocked_count(q, projection({occ.normalized()}, {occ.norm()}), cfg), 0u);
}

TEST(BlockedCount, EmptyOccludersGiveZero) {
  const auto q = projection({Point3(0, 0, 1)}, {2.0});
  EXPECT_EQ(svc::blocked_count(q, SphereProjection{}, SvcConfig{}), 0u);
}

TEST(BlockedCount, SingleNearestOccluderPerTarget) {
  // Two occluders on the same ray count the target once.
  const auto q = projection({Point3(0, 0, 1)}, {2.0});
  EXPECT_EQ(svc::blocked_count(q, projection({Point3(0, 0, 1), Point3(0, 0, 1)}, {1.0, 0.5}), SvcConfig{}), 1u);
}

namespace {

// Targets on random directions; occluders near some of them, jittered inside
// and outside the sight cone, at ranges in front of and behind the target.
void random_instance(std::mt19937_64& rng, SphereProjection& target, SphereProjection& occ) {
  std::uniform_int_distribution<std::size_t> count(1, 300);
  std::uniform_real_distribution<double> range(0.5, 5.0), jitter(0.0, 0.02), coin(0.0, 1.0);
  const std::size_t nq = count(rng), np = count(rng);
  std::vector<Point3> qd, pd;
  std::vector<double> qr, pr;
  for (std::size_t i = 0; i < nq; ++i) {
    qd.push_back(oracle::random_unit(rng));
    qr.push_back(range(rng));
  }
  for (std::size_t i = 0; i < np; ++i) {
    Point3 d = coin(rng) < 0.7 ? qd[i % nq] : oracle::random_unit(rng);
    d = (d + jitter(rng) * oracle::random_unit(rng)).normalized();
    pd.push_back(d);
    pr.push_back(range(rng));
  }
  target = projection(qd, qr);
  occ = projection(pd, pr);
}

}  // namespace

TEST(BlockedCount, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2);
  SvcConfig cfg;
  cfg.t_threshold = 0.9999;  // widened so that the cone test is exercised often
  std::size_t total = 0;
  for (int i = 0; i < 100; ++i) {
    SphereProjection target, occ;
    random_instance(rng, target, occ);
    const auto got = svc::blocked_count(target, occ, cfg);
    ASSERT_EQ(got, oracle::blocked_count(target, occ, cfg)) << "instance " << i;
    total += got;
  }
  EXPECT_GT(total, 0u);
}

TEST(BlockedCount, MonotoneInThresholdAndTau) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    SphereProjection target, occ;
    random_instance(rng, target, occ);
    SvcConfig tight, loose;
    loose.t_threshold = 0.999;
    EXPECT_LE(svc::blocked_count(target, occ, tight), svc::blocked_count(target, occ, loose));
    SvcConfig wide_tau;
    wide_tau.tau = 0.5;
    wide_tau.t_threshold = loose.t_threshold;
    EXPECT_GE(svc::blocked_count(target, occ, loose), svc::blocked_count(target, occ, wide_tau));
  }
}

TEST(SvcCheck, ThresholdArithmetic) {
  // 100 target points on a wall; occluders placed on exactly k of their rays.
  std::vector<Point3> dst;
  for (int i = 0; i < 100; ++i) dst.push_back(Point3(0.05 * (i % 10), 0.05 * (i / 10), 2.0));
  auto check_with = [&](std::size_t k) {
    std::vector<Point3> src;
    for (std::size_t i = 0; i < k; ++i) src.push_back(0.5 * dst[i]);
    return svc::svc_check(PointCloud(src), PointCloud(dst), RigidTransform::identity(), NNIndex::build(dst),
                          SvcConfig{});
  };
  const auto one = check_with(1);
  EXPECT_EQ(one.blocked, 1u);
  EXPECT_TRUE(one.passed);
  const auto two = check_with(2);
  EXPECT_EQ(two.blocked, 2u);
  EXPECT_FALSE(two.passed);
}

TEST(SvcCheck, PlantedBlockersFail) {
  const auto dst = wall();
  std::vector<Point3> src;
  for (const auto& p : patch()) src.push_back(0.5 * p);  // 121 points on target rays, 1 m in front
  const SvcConfig cfg;
  const auto r = svc::svc_check(PointCloud(src), PointCloud(dst), RigidTransform::identity(), NNIndex::build(dst), cfg);
  EXPECT_EQ(r.blocked, 121u);
  EXPECT_GE(r.blocked, static_cast<std::size_t>(std::ceil(cfg.eta2 * static_cast<double>(dst.size()))));
  EXPECT_FALSE(r.passed);
}

TEST(SvcCheck, EmptyNonOverlapPasses) {
  const auto dst = wall();
  const auto r = svc::svc_check(PointCloud(patch()), PointCloud(dst), RigidTransform::identity(),
                                NNIndex::build(dst), SvcConfig{});
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.blocked, 0u);
}

TEST(SvcCheck, DegenerateProjectionPasses) {
  // The only occluder sits on the target sensor.
  const auto dst = wall();
  const auto r = svc::svc_check(PointCloud({Point3::Zero()}), PointCloud(dst), RigidTransform::identity(),
                                NNIndex::build(dst), SvcConfig{});
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.blocked, 0u);
}

TEST(SvcDoubleCheck, IdenticalCloudsAccepted) {
  const PointCloud pc(wall());
  const auto idx = NNIndex::build(pc.points());
  const auto v = svc::svc_double_check(pc, pc, RigidTransform::identity(), idx, idx, SvcConfig{});
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.forward_blocked, 0u);
  EXPECT_EQ(v.backward_blocked, 0u);
  EXPECT_EQ(v.forward_budget, 9u);  // ceil(0.02 * 441)
  EXPECT_EQ(v.backward_budget, 9u);
}

TEST(SvcDoubleCheck, BlockingOnlyBackwardIsRejected) {
  // Source is the wall, target a small patch in front of it. Seen from the
  // target sensor nothing hides the patch; seen from the source sensor the
  // patch hides part of the wall.
  std::vector<Point3> near;
  for (const auto& p : patch()) near.push_back(0.5 * p);
  const PointCloud src(wall()), dst(near);
  const auto si = NNIndex::build(src.points()), di = NNIndex::build(dst.points());
  const SvcConfig cfg;
  const auto forward = svc::svc_check(src, dst, RigidTransform::identity(), di, cfg);
  EXPECT_TRUE(forward.passed);
  EXPECT_EQ(forward.blocked, 0u);
  const auto v = svc::svc_double_check(src, dst, RigidTransform::identity(), si, di, cfg);
  EXPECT_EQ(v.forward_blocked, 0u);
  EXPECT_EQ(v.backward_blocked, 121u);
  EXPECT_FALSE(v.accepted);
}

TEST(SvcDoubleCheck, GroundTruthOnSimulatedPair) {
  const SvcConfig cfg;
  const auto pairs = svc::simulate_pairs(2, 11, cfg);
  for (const auto& p : pairs) {
    const auto si = NNIndex::build(p.src.points()), di = NNIndex::build(p.dst.points());
    const auto forward = svc::svc_check(p.src, p.dst, p.gt, di, cfg);
    EXPECT_TRUE(forward.passed);
    EXPECT_EQ(forward.blocked, 0u);
    const auto v = svc::svc_double_check(p.src, p.dst, p.gt, si, di, cfg);
    EXPECT_TRUE(v.accepted);
    EXPECT_EQ(v.backward_blocked, 0u);
  }
}

TEST(SvcDoubleCheck, FrameInvariance) {
  // Expressing both scans in other frames and conjugating the motion keeps the counts.
  const auto dst_pts = wall();
  const PointCloud src(patch()), dst(dst_pts);
  const RigidTransform t = shift(Point3(0, 0, -1));
  std::mt19937_64 rng(4);
  const SvcConfig cfg;
  const auto base = svc::svc_double_check(src, dst, t, NNIndex::build(src.points()), NNIndex::build(dst.points()), cfg);
  for (int i = 0; i < 5; ++i) {
    const RigidTransform a = oracle::random_transform(rng), b = oracle::random_transform(rng);
    const PointCloud src2 = svc::apply(a, src), dst2 = svc::apply(b, dst);
    const RigidTransform t2 = svc::compose(b, svc::compose(t, svc::inverse(a)));
    const auto v = svc::svc_double_check(src2, dst2, t2, NNIndex::build(src2.points()),
                                         NNIndex::build(dst2.points()), cfg);
    EXPECT_EQ(v.forward_blocked, base.forward_blocked);
    EXPECT_EQ(v.backward_blocked, base.backward_blocked);
    EXPECT_EQ(v.accepted, base.accepted);
  }
}

TEST(EvaluateHypotheses, SingleGroundTruth) {
  const PlantedInstance inst;
  const std::vector<RigidTransform> h{inst.right};
  const auto r = svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, h, SvcConfig{});
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.best_input_index, 0u);
  EXPECT_EQ(r.best.matrix(), inst.right.matrix());
}

TEST(EvaluateHypotheses, BlockedTopScoreYieldsToCorrectSecond) {
  const PlantedInstance inst;
  const std::vector<RigidTransform> h{inst.right, inst.wrong};
  const auto r = svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, h, SvcConfig{});
  EXPECT_EQ(r.scores[0], 3u);
  EXPECT_EQ(r.scores[1], 4u);
  EXPECT_EQ(r.order, (std::vector<std::size_t>{1, 0}));
  ASSERT_EQ(r.verdicts.size(), 2u);
  EXPECT_FALSE(r.verdicts[0].accepted);
  EXPECT_GE(r.verdicts[0].forward_blocked, r.verdicts[0].forward_budget);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.best_input_index, 0u);
  EXPECT_EQ(r.best_rank, 1u);
}

TEST(EvaluateHypotheses, AllBlockedFallsBackToTopScore) {
  const PlantedInstance inst;
  const RigidTransform other = shift(Point3(0.15, 0, -1));
  const std::vector<RigidTransform> h{other, inst.wrong};
  const auto r = svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, h, SvcConfig{});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.verdicts.size(), 2u);
  EXPECT_EQ(r.best_input_index, 1u);
  EXPECT_EQ(r.best_rank, 0u);
  EXPECT_EQ(r.best.matrix(), inst.wrong.matrix());
}

TEST(EvaluateHypotheses, StableOrderOnTies) {
  const PlantedInstance inst;
  const std::vector<RigidTransform> h{inst.right, inst.right, inst.right};
  const auto r = svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, h, SvcConfig{});
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(r.best_input_index, 0u);
  EXPECT_EQ(r.verdicts.size(), 1u);
}

TEST(EvaluateHypotheses, EmptyListThrows) {
  const PlantedInstance inst;
  const std::vector<RigidTransform> none;
  EXPECT_EQ(code_of([&] { svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, none, SvcConfig{}); }),
            ErrorCode::EmptyHypotheses);
}

TEST(EvaluateHypotheses, NeverBelowTopScoreUnlessTopRejected) {
  const PlantedInstance inst;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RigidTransform> h{inst.right, inst.wrong};
    for (int i = 0; i < 3; ++i) h.push_back(oracle::random_transform(rng, 0.5));
    std::shuffle(h.begin(), h.end(), rng);
    const auto r = svc::evaluate_hypotheses(inst.src, inst.dst, inst.corr, h, SvcConfig{});
    const std::size_t top = r.scores[r.order.front()];
    if (r.scores[r.best_input_index] < top) {
      EXPECT_FALSE(r.verdicts.front().accepted);
    }
  }
}
