#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "svc/svc.h"

namespace fs = std::filesystem;

namespace {

struct Xyz {
  double x, y, z;
};

// Same construction as the shared C++ fixture: a wall at z = 2, its central
// patch as source, and four clutter points that favor the 1 m shift.
struct Planted {
  std::vector<double> src, dst;
  std::vector<std::pair<size_t, size_t>> corr;

  Planted() {
    std::vector<Xyz> wall, patch;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        const Xyz p{0.05 * i, 0.05 * j, 2.0};
        wall.push_back(p);
        if (std::abs(i) <= 5 && std::abs(j) <= 5) patch.push_back(p);
      }
    }
    for (const auto& p : wall) dst.insert(dst.end(), {p.x, p.y, p.z});
    for (size_t k = 0; k < patch.size(); ++k) {
      const auto& p = patch[k];
      src.insert(src.end(), {p.x, p.y, p.z});
      if (std::abs(std::abs(p.x) - 0.25) < 1e-12 && std::abs(std::abs(p.y) - 0.25) < 1e-12) {
        dst.insert(dst.end(), {p.x, p.y, p.z - 1.0});
        corr.push_back({k, dst.size() / 3 - 1});
      }
    }
    for (size_t k : {60u, 61u, 72u}) {
      for (size_t j = 0; j < wall.size(); ++j) {
        if (wall[j].x == patch[k].x && wall[j].y == patch[k].y) corr.push_back({k, j});
      }
    }
  }
};

svc_transform shift_z(double dz) {
  svc_transform t;
  svc_transform_identity(&t);
  t.m[11] = dz;
  return t;
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(svc_cloud_create(inst_.src.data(), inst_.src.size() / 3, nullptr, &src_), SVC_OK);
    ASSERT_EQ(svc_cloud_create(inst_.dst.data(), inst_.dst.size() / 3, nullptr, &dst_), SVC_OK);
    ASSERT_EQ(svc_correspondences_create(&corr_), SVC_OK);
    for (const auto& [i, j] : inst_.corr) ASSERT_EQ(svc_correspondences_add(corr_, i, j, -1.0), SVC_OK);
    svc_config_default(&cfg_);
    dir_ = fs::temp_directory_path() / ("svc_capi_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    svc_cloud_free(src_);
    svc_cloud_free(dst_);
    svc_correspondences_free(corr_);
    fs::remove_all(dir_);
  }

  Planted inst_;
  svc_cloud* src_ = nullptr;
  svc_cloud* dst_ = nullptr;
  svc_correspondences* corr_ = nullptr;
  svc_config cfg_{};
  fs::path dir_;
};

}  // namespace

TEST(CApiBasics, VersionAndStatusStrings) {
  EXPECT_NE(std::string(svc_version()), "");
  EXPECT_STREQ(svc_status_string(SVC_OK), "ok");
  for (int s : {1, 5, 13, 16, 99}) EXPECT_NE(std::string(svc_status_string(static_cast<svc_status>(s))), "");
}

TEST(CApiBasics, DefaultsMatchDocumentedValues) {
  svc_config c;
  svc_config_default(&c);
  EXPECT_EQ(c.tau, 0.1);
  EXPECT_EQ(c.eta1, 0.1);
  EXPECT_EQ(c.eta2, 0.02);
  EXPECT_EQ(c.t_threshold, 0.99997);
  EXPECT_EQ(c.k, 200u);
  svc_config_outdoor(&c);
  EXPECT_EQ(c.tau, 0.6);
  svc_thresholds t;
  svc_thresholds_outdoor(&t);
  EXPECT_EQ(t.rotation_deg, 5.0);
  EXPECT_EQ(t.translation, 0.6);
}

TEST(CApiBasics, ErrorsSetLastError) {
  svc_cloud* c = nullptr;
  EXPECT_EQ(svc_cloud_create(nullptr, 3, nullptr, &c), SVC_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(svc_last_error()), "");
  const double bad[3] = {0, NAN, 1};
  EXPECT_NE(svc_cloud_create(bad, 1, nullptr, &c), SVC_OK);
  EXPECT_EQ(c, nullptr);
  EXPECT_EQ(svc_cloud_load("/nonexistent/x.ply", nullptr, &c), SVC_ERR_IO);
  svc_transform t;
  EXPECT_EQ(svc_pose_load("/nonexistent/p.txt", &t), SVC_ERR_IO);
}

TEST(CApiBasics, TransformErrors) {
  svc_transform a, b;
  svc_transform_identity(&a);
  svc_transform_identity(&b);
  b.m[0] = 0;  // 90 degrees about z
  b.m[1] = -1;
  b.m[4] = 1;
  b.m[5] = 0;
  b.m[3] = 3;
  b.m[7] = 4;
  double re = 0, te = 0;
  ASSERT_EQ(svc_rotation_error(&a, &b, &re), SVC_OK);
  ASSERT_EQ(svc_translation_error(&a, &b, &te), SVC_OK);
  EXPECT_NEAR(re, 90.0, 1e-6);
  EXPECT_NEAR(te, 5.0, 1e-12);
  b.m[0] = 2;
  EXPECT_EQ(svc_rotation_error(&a, &b, &re), SVC_ERR_INVALID_ROTATION);
}

TEST_F(CApi, CloudAccessors) {
  EXPECT_EQ(svc_cloud_size(src_), 121u);
  std::vector<double> xyz(3 * 121);
  EXPECT_EQ(svc_cloud_points(src_, xyz.data(), 121), 121u);
  EXPECT_EQ(xyz, inst_.src);
  double vp[3] = {1, 1, 1};
  svc_cloud_viewpoint(src_, vp);
  EXPECT_EQ(vp[0], 0.0);
  EXPECT_EQ(svc_correspondences_size(corr_), 7u);
}

TEST_F(CApi, CloudAndPoseFiles) {
  const auto ply = (dir_ / "c.ply").string();
  ASSERT_EQ(svc_cloud_save(src_, ply.c_str(), "ply-binary-le"), SVC_OK);
  svc_cloud* back = nullptr;
  ASSERT_EQ(svc_cloud_load(ply.c_str(), nullptr, &back), SVC_OK);
  EXPECT_EQ(svc_cloud_size(back), 121u);
  svc_cloud_free(back);
  EXPECT_EQ(svc_cloud_save(src_, ply.c_str(), "las"), SVC_ERR_UNSUPPORTED_FORMAT);

  const auto pose = (dir_ / "p.txt").string();
  const svc_transform t = shift_z(-1);
  ASSERT_EQ(svc_pose_save(&t, pose.c_str()), SVC_OK);
  svc_transform u;
  ASSERT_EQ(svc_pose_load(pose.c_str(), &u), SVC_OK);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(u.m[i], t.m[i]);
  std::ofstream(pose) << "1 0 0 0\n0 1 0 0\n0 0 -1 0\n0 0 0 1\n";
  EXPECT_EQ(svc_pose_load(pose.c_str(), &u), SVC_ERR_INVALID_ROTATION);
}

TEST_F(CApi, ConfigFile) {
  const auto path = (dir_ / "svc.cfg").string();
  std::ofstream(path) << "tau=0.6\nk=10\n";
  svc_config c;
  svc_config_default(&c);
  ASSERT_EQ(svc_config_load(path.c_str(), &c), SVC_OK);
  EXPECT_EQ(c.tau, 0.6);
  EXPECT_EQ(c.k, 10u);
  std::ofstream(path) << "bogus=1\n";
  EXPECT_EQ(svc_config_load(path.c_str(), &c), SVC_ERR_PARSE);
}

TEST_F(CApi, VerifyPlantedScene) {
  svc_verdict v;
  const svc_transform id = shift_z(0);
  ASSERT_EQ(svc_verify(src_, dst_, &id, &cfg_, &v), SVC_OK);
  EXPECT_EQ(v.accepted, 1);
  const svc_transform wrong = shift_z(-1);
  ASSERT_EQ(svc_verify(src_, dst_, &wrong, &cfg_, &v), SVC_OK);
  EXPECT_EQ(v.accepted, 0);
  EXPECT_GE(v.forward_blocked, v.forward_budget);
  char* json = nullptr;
  ASSERT_EQ(svc_verdict_to_json(&v, &json), SVC_OK);
  EXPECT_NE(std::string(json).find("\"accepted\": false"), std::string::npos) << json;
  svc_string_free(json);
  svc_config bad = cfg_;
  bad.eta1 = 2;
  EXPECT_EQ(svc_verify(src_, dst_, &id, &bad, &v), SVC_ERR_INVALID_ARGUMENT);
}

TEST_F(CApi, RegisterPicksUnblockedHypothesis) {
  const svc_transform gt = shift_z(0);
  svc_transform out;
  svc_report* rep = nullptr;
  ASSERT_EQ(svc_register(src_, dst_, corr_, &cfg_, SVC_MODE_SVC, 1, &gt, nullptr, &out, &rep), SVC_OK);
  EXPECT_NEAR(out.m[11], 0.0, 1e-9);
  ASSERT_EQ(svc_report_row_count(rep), 1u);
  svc_registration_row row;
  ASSERT_EQ(svc_report_row(rep, 0, &row), SVC_OK);
  EXPECT_EQ(row.success, 1);
  EXPECT_EQ(row.mode, SVC_MODE_SVC);
  EXPECT_GE(row.rank, 1u);
  svc_report_free(rep);

  ASSERT_EQ(svc_register(src_, dst_, corr_, &cfg_, SVC_MODE_NO_SVC, 1, &gt, nullptr, &out, nullptr), SVC_OK);
  EXPECT_NEAR(out.m[11], -1.0, 1e-9);
  EXPECT_EQ(svc_register(src_, dst_, corr_, &cfg_, SVC_MODE_BOTH, 1, &gt, nullptr, &out, nullptr),
            SVC_ERR_INVALID_ARGUMENT);
}

TEST_F(CApi, RegisterWithoutHypothesisStillReports) {
  svc_correspondences* two = nullptr;
  ASSERT_EQ(svc_correspondences_create(&two), SVC_OK);
  ASSERT_EQ(svc_correspondences_add(two, 0, 0, 0.5), SVC_OK);
  ASSERT_EQ(svc_correspondences_add(two, 1, 1, -1), SVC_OK);
  EXPECT_EQ(svc_correspondences_add(two, 1, 1, -1), SVC_ERR_INVALID_ARGUMENT);
  svc_transform out;
  svc_report* rep = nullptr;
  EXPECT_EQ(svc_register(src_, dst_, two, &cfg_, SVC_MODE_SVC, 1, nullptr, nullptr, &out, &rep),
            SVC_ERR_NO_VALID_HYPOTHESIS);
  ASSERT_NE(rep, nullptr);
  svc_registration_row row;
  ASSERT_EQ(svc_report_row(rep, 0, &row), SVC_OK);
  EXPECT_EQ(row.failed, 1);
  EXPECT_EQ(row.success, 0);
  EXPECT_EQ(svc_report_row(rep, 1, &row), SVC_ERR_INDEX_OUT_OF_BOUNDS);
  svc_report_free(rep);
  svc_correspondences_free(two);
}

TEST(CApiDataset, SimulateBenchDecide) {
  svc_dataset_options opts;
  svc_dataset_options_default(&opts);
  const double rates[2] = {0.8, 0.9};
  opts.pairs = 2;
  opts.correspondences = 200;
  opts.outlier_rates = rates;
  opts.setting_count = 2;
  opts.negatives_per_pair = 1;
  svc_config cfg;
  svc_config_default(&cfg);
  svc_dataset* ds = nullptr;
  ASSERT_EQ(svc_dataset_simulate(&opts, &cfg, 3, &ds), SVC_OK);
  EXPECT_EQ(svc_dataset_pair_count(ds), 2u);
  EXPECT_EQ(svc_dataset_setting_count(ds), 2u);
  EXPECT_GE(svc_dataset_decision_count(ds), 2u);

  svc_cloud* src = nullptr;
  svc_transform gt;
  ASSERT_EQ(svc_dataset_pair(ds, 1, &src, nullptr, &gt), SVC_OK);
  EXPECT_GT(svc_cloud_size(src), 100u);
  svc_cloud_free(src);
  EXPECT_EQ(svc_dataset_pair(ds, 2, nullptr, nullptr, &gt), SVC_ERR_INDEX_OUT_OF_BOUNDS);

  svc_run_options run;
  svc_run_options_default(&run);
  run.modes = SVC_MODE_BOTH;
  run.timing = 0;
  svc_report* rep = nullptr;
  ASSERT_EQ(svc_bench(ds, &cfg, 7, &run, &rep), SVC_OK);
  EXPECT_EQ(svc_report_row_count(rep), 2u * 2u * 2u);
  EXPECT_EQ(svc_report_summary_count(rep), 4u);
  svc_registration_summary s;
  ASSERT_EQ(svc_report_summary(rep, 1, &s), SVC_OK);
  EXPECT_EQ(s.mode, SVC_MODE_NO_SVC);
  EXPECT_EQ(s.pairs, 2u);
  EXPECT_EQ(s.time_p50_ms, 0.0);
  char* csv = nullptr;
  ASSERT_EQ(svc_report_to_csv(rep, &csv), SVC_OK);
  EXPECT_EQ(std::string(csv).rfind("record,setting,mode,", 0), 0u);
  svc_string_free(csv);
  svc_decision_counts a, b;
  EXPECT_EQ(svc_report_decision(rep, &a, &b), SVC_ERR_INVALID_ARGUMENT);
  svc_report_free(rep);

  ASSERT_EQ(svc_decide(ds, &cfg, 1, &rep), SVC_OK);
  ASSERT_EQ(svc_report_decision(rep, &a, &b), SVC_OK);
  EXPECT_EQ(a.tp + a.fp + a.tn + a.fn, svc_dataset_decision_count(ds));
  EXPECT_EQ(b.recall, 1.0);
  char* json = nullptr;
  ASSERT_EQ(svc_report_to_json(rep, &json), SVC_OK);
  EXPECT_NE(std::string(json).find("\"accept_all\""), std::string::npos);
  svc_string_free(json);
  svc_report_free(rep);

  const auto dir = fs::temp_directory_path() / ("svc_capi_ds_" + std::to_string(::getpid()));
  ASSERT_EQ(svc_dataset_save(ds, dir.string().c_str()), SVC_OK);
  svc_dataset* back = nullptr;
  ASSERT_EQ(svc_dataset_load(dir.string().c_str(), &back), SVC_OK);
  EXPECT_EQ(svc_dataset_pair_count(back), 2u);
  svc_dataset_free(back);
  fs::remove_all(dir);
  svc_dataset_free(ds);
}
