#include "svc/svc.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <variant>

#include "svc/bench.hpp"
#include "svc/error.hpp"
#include "svc/io.hpp"
#include "svc/svc.hpp"

struct svc_cloud {
  svc::PointCloud pc;
};

struct svc_correspondences {
  svc::CorrespondenceSet set;
};

struct svc_dataset {
  svc::Dataset ds;
};

struct svc_report {
  std::variant<svc::RegistrationReport, svc::DecisionReport> value;
};

namespace {

thread_local std::string last_error;

svc_status status_of(svc::ErrorCode code) {
  switch (code) {
    case svc::ErrorCode::InvalidArgument: return SVC_ERR_INVALID_ARGUMENT;
    case svc::ErrorCode::DegenerateInput: return SVC_ERR_DEGENERATE_INPUT;
    case svc::ErrorCode::EmptyInput: return SVC_ERR_EMPTY_INPUT;
    case svc::ErrorCode::NotUnitNorm: return SVC_ERR_NOT_UNIT_NORM;
    case svc::ErrorCode::IndexOutOfBounds: return SVC_ERR_INDEX_OUT_OF_BOUNDS;
    case svc::ErrorCode::AllPointsDegenerate: return SVC_ERR_ALL_POINTS_DEGENERATE;
    case svc::ErrorCode::EmptyHypotheses: return SVC_ERR_EMPTY_HYPOTHESES;
    case svc::ErrorCode::TooFewCorrespondences: return SVC_ERR_TOO_FEW_CORRESPONDENCES;
    case svc::ErrorCode::NoValidHypothesis: return SVC_ERR_NO_VALID_HYPOTHESIS;
    case svc::ErrorCode::EmptyScan: return SVC_ERR_EMPTY_SCAN;
    case svc::ErrorCode::NegativeSamplingFailed: return SVC_ERR_NEGATIVE_SAMPLING_FAILED;
    case svc::ErrorCode::InsufficientOverlap: return SVC_ERR_INSUFFICIENT_OVERLAP;
    case svc::ErrorCode::ParseError: return SVC_ERR_PARSE;
    case svc::ErrorCode::UnsupportedFormat: return SVC_ERR_UNSUPPORTED_FORMAT;
    case svc::ErrorCode::InvalidRotation: return SVC_ERR_INVALID_ROTATION;
    case svc::ErrorCode::IoError: return SVC_ERR_IO;
  }
  return SVC_ERR_INTERNAL;
}

svc_status fail(svc_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
svc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SVC_OK;
  } catch (const svc::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SVC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SVC_ERR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw svc::Error(svc::ErrorCode::InvalidArgument, what);
}

svc::SvcConfig to_cpp(const svc_config* c) {
  if (!c) return svc::SvcConfig::indoor();
  svc::SvcConfig cfg;
  cfg.tau = c->tau;
  cfg.eta1 = c->eta1;
  cfg.eta2 = c->eta2;
  cfg.t_threshold = c->t_threshold;
  cfg.k = c->k;
  cfg.min_range = c->min_range;
  cfg.validate();
  return cfg;
}

void from_cpp(const svc::SvcConfig& cfg, svc_config* c) {
  c->tau = cfg.tau;
  c->eta1 = cfg.eta1;
  c->eta2 = cfg.eta2;
  c->t_threshold = cfg.t_threshold;
  c->k = cfg.k;
  c->min_range = cfg.min_range;
}

svc::RigidTransform to_cpp(const svc_transform* t) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = t->m[i];
  return svc::RigidTransform::from_matrix(m);
}

void from_cpp(const svc::RigidTransform& t, svc_transform* out) {
  const Eigen::Matrix4d m = t.matrix();
  for (int i = 0; i < 16; ++i) out->m[i] = m(i / 4, i % 4);
}

svc::Thresholds to_cpp(const svc_thresholds* t) {
  if (!t) return svc::Thresholds::indoor();
  return {t->rotation_deg, t->translation};
}

void from_cpp(const svc::SvcVerdict& v, svc_verdict* out) {
  out->accepted = v.accepted ? 1 : 0;
  out->forward_blocked = v.forward_blocked;
  out->backward_blocked = v.backward_blocked;
  out->forward_budget = v.forward_budget;
  out->backward_budget = v.backward_budget;
}

svc::SvcVerdict to_cpp(const svc_verdict* v) {
  return {v->accepted != 0, v->forward_blocked, v->backward_blocked, v->forward_budget, v->backward_budget};
}

int mode_flag(svc::Mode m) { return m == svc::Mode::Svc ? SVC_MODE_SVC : SVC_MODE_NO_SVC; }

std::vector<svc::Mode> modes_of(int flags) {
  std::vector<svc::Mode> modes;
  if (flags & SVC_MODE_SVC) modes.push_back(svc::Mode::Svc);
  if (flags & SVC_MODE_NO_SVC) modes.push_back(svc::Mode::NoSvc);
  require(!modes.empty(), "mode must select svc, no-svc or both");
  return modes;
}

svc::CloudFormat format_of(const char* format, const char* path) {
  return format ? svc::parse_cloud_format(format) : svc::detect_cloud_format(path);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const svc::RegistrationReport* registration_of(const svc_report* r) {
  return r ? std::get_if<svc::RegistrationReport>(&r->value) : nullptr;
}

}  // namespace

extern "C" {

const char* svc_version(void) { return "1.0.0"; }

const char* svc_status_string(svc_status status) {
  switch (status) {
    case SVC_OK: return "ok";
    case SVC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SVC_ERR_DEGENERATE_INPUT: return "degenerate input";
    case SVC_ERR_EMPTY_INPUT: return "empty input";
    case SVC_ERR_NOT_UNIT_NORM: return "not unit norm";
    case SVC_ERR_INDEX_OUT_OF_BOUNDS: return "index out of bounds";
    case SVC_ERR_ALL_POINTS_DEGENERATE: return "all points degenerate";
    case SVC_ERR_EMPTY_HYPOTHESES: return "empty hypotheses";
    case SVC_ERR_TOO_FEW_CORRESPONDENCES: return "too few correspondences";
    case SVC_ERR_NO_VALID_HYPOTHESIS: return "no valid hypothesis";
    case SVC_ERR_EMPTY_SCAN: return "empty scan";
    case SVC_ERR_NEGATIVE_SAMPLING_FAILED: return "negative sampling failed";
    case SVC_ERR_INSUFFICIENT_OVERLAP: return "insufficient overlap";
    case SVC_ERR_PARSE: return "parse error";
    case SVC_ERR_UNSUPPORTED_FORMAT: return "unsupported format";
    case SVC_ERR_INVALID_ROTATION: return "invalid rotation";
    case SVC_ERR_IO: return "io error";
    case SVC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* svc_last_error(void) { return last_error.c_str(); }

void svc_string_free(char* s) { std::free(s); }

void svc_config_default(svc_config* cfg) {
  if (cfg) from_cpp(svc::SvcConfig::indoor(), cfg);
}

void svc_config_outdoor(svc_config* cfg) {
  if (cfg) from_cpp(svc::SvcConfig::outdoor(), cfg);
}

svc_status svc_config_load(const char* path, svc_config* cfg) {
  return guarded([&] {
    require(path && cfg, "path and cfg are required");
    auto entries = svc::load_key_values(path);
    svc::SvcConfig c;
    c.tau = cfg->tau;
    c.eta1 = cfg->eta1;
    c.eta2 = cfg->eta2;
    c.t_threshold = cfg->t_threshold;
    c.k = cfg->k;
    c.min_range = cfg->min_range;
    svc::apply_config(entries, c);
    if (!entries.empty()) {
      throw svc::Error(svc::ErrorCode::ParseError, std::string(path) + ": unknown key '" + entries.begin()->first + "'");
    }
    c.validate();
    from_cpp(c, cfg);
  });
}

void svc_thresholds_indoor(svc_thresholds* t) {
  if (t) *t = {svc::Thresholds::indoor().rotation_deg, svc::Thresholds::indoor().translation};
}

void svc_thresholds_outdoor(svc_thresholds* t) {
  if (t) *t = {svc::Thresholds::outdoor().rotation_deg, svc::Thresholds::outdoor().translation};
}

void svc_transform_identity(svc_transform* t) {
  if (t) from_cpp(svc::RigidTransform::identity(), t);
}

void svc_dataset_options_default(svc_dataset_options* opts) {
  if (!opts) return;
  static const double default_rate = 0.95;
  const svc::DatasetOptions d;
  opts->pairs = d.pairs;
  opts->correspondences = d.correspondences;
  opts->outlier_rates = &default_rate;
  opts->decoy_ratios = nullptr;
  opts->setting_count = 1;
  opts->noise_sigma = d.noise_sigma;
  opts->negatives_per_pair = d.negatives_per_pair;
  opts->min_overlap = d.sampling.min_overlap;
  opts->max_overlap = d.sampling.max_overlap;
  opts->planted_blocker_factor = d.decision.planted_blocker_factor;
}

void svc_run_options_default(svc_run_options* opts) {
  if (!opts) return;
  opts->modes = SVC_MODE_SVC;
  svc_thresholds_indoor(&opts->thresholds);
  opts->threads = 1;
  opts->timing = 1;
}

svc_status svc_cloud_create(const double* xyz, size_t n, const double* viewpoint, svc_cloud** out) {
  return guarded([&] {
    require(out && (xyz || n == 0), "xyz and out are required");
    std::vector<svc::Point3> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = svc::Point3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    const svc::Point3 vp = viewpoint ? svc::Point3(viewpoint[0], viewpoint[1], viewpoint[2]) : svc::Point3::Zero();
    *out = new svc_cloud{svc::PointCloud(std::move(pts), vp)};
  });
}

svc_status svc_cloud_load(const char* path, const char* format, svc_cloud** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new svc_cloud{svc::load_cloud(path, format_of(format, path))};
  });
}

svc_status svc_cloud_save(const svc_cloud* cloud, const char* path, const char* format) {
  return guarded([&] {
    require(cloud && path, "cloud and path are required");
    svc::save_cloud(cloud->pc, path, format_of(format ? format : "ply-binary-le", path));
  });
}

size_t svc_cloud_size(const svc_cloud* cloud) { return cloud ? cloud->pc.size() : 0; }

size_t svc_cloud_points(const svc_cloud* cloud, double* xyz, size_t capacity) {
  if (!cloud || !xyz) return 0;
  const size_t n = std::min(capacity, cloud->pc.size());
  for (size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) xyz[3 * i + k] = cloud->pc[i][k];
  }
  return n;
}

void svc_cloud_viewpoint(const svc_cloud* cloud, double out[3]) {
  if (!cloud || !out) return;
  for (int k = 0; k < 3; ++k) out[k] = cloud->pc.viewpoint()[k];
}

void svc_cloud_free(svc_cloud* cloud) { delete cloud; }

svc_status svc_correspondences_create(svc_correspondences** out) {
  return guarded([&] {
    require(out, "out is required");
    *out = new svc_correspondences{};
  });
}

svc_status svc_correspondences_add(svc_correspondences* corr, size_t src, size_t dst, double weight) {
  return guarded([&] {
    require(corr, "corr is required");
    svc::Correspondence c{src, dst, std::nullopt};
    if (weight >= 0) c.weight = weight;
    corr->set.add(c);
  });
}

svc_status svc_correspondences_load(const char* path, svc_correspondences** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new svc_correspondences{svc::load_correspondences(path)};
  });
}

svc_status svc_correspondences_save(const svc_correspondences* corr, const char* path) {
  return guarded([&] {
    require(corr && path, "corr and path are required");
    svc::save_correspondences(corr->set, path);
  });
}

size_t svc_correspondences_size(const svc_correspondences* corr) { return corr ? corr->set.size() : 0; }

void svc_correspondences_free(svc_correspondences* corr) { delete corr; }

svc_status svc_pose_load(const char* path, svc_transform* out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    from_cpp(svc::load_pose(path), out);
  });
}

svc_status svc_pose_save(const svc_transform* t, const char* path) {
  return guarded([&] {
    require(t && path, "transform and path are required");
    svc::save_pose(to_cpp(t), path);
  });
}

svc_status svc_rotation_error(const svc_transform* a, const svc_transform* b, double* deg) {
  return guarded([&] {
    require(a && b && deg, "arguments are required");
    *deg = svc::rotation_error(to_cpp(a), to_cpp(b));
  });
}

svc_status svc_translation_error(const svc_transform* a, const svc_transform* b, double* meters) {
  return guarded([&] {
    require(a && b && meters, "arguments are required");
    *meters = svc::translation_error(to_cpp(a), to_cpp(b));
  });
}

svc_status svc_verify(const svc_cloud* src, const svc_cloud* dst, const svc_transform* t, const svc_config* cfg,
                      svc_verdict* out) {
  return guarded([&] {
    require(src && dst && t && out, "src, dst, transform and out are required");
    const svc::SvcConfig c = to_cpp(cfg);
    const auto src_index = svc::NNIndex::build(src->pc.points());
    const auto dst_index = svc::NNIndex::build(dst->pc.points());
    from_cpp(svc::svc_double_check(src->pc, dst->pc, to_cpp(t), src_index, dst_index, c), out);
  });
}

svc_status svc_register(const svc_cloud* src, const svc_cloud* dst, const svc_correspondences* corr,
                        const svc_config* cfg, svc_mode mode, uint64_t seed, const svc_transform* gt,
                        const svc_thresholds* thresholds, svc_transform* out, svc_report** report) {
  return guarded([&] {
    require(src && dst && corr && out, "src, dst, corr and out are required");
    require(mode == SVC_MODE_SVC || mode == SVC_MODE_NO_SVC, "register takes a single mode");
    std::optional<svc::RigidTransform> truth;
    if (gt) truth = to_cpp(gt);
    const auto outcomes = svc::run_registration(src->pc, dst->pc, corr->set, to_cpp(cfg), modes_of(mode), seed,
                                                truth, to_cpp(thresholds));
    from_cpp(outcomes.front().transform, out);
    if (report) {
      // Filled in before a failure is reported so the failed row stays visible.
      svc::RegistrationReport r;
      r.thresholds = to_cpp(thresholds);
      r.rows.push_back(outcomes.front().row);
      svc::summarize(r);
      *report = new svc_report{std::move(r)};
    }
    if (!outcomes.front().row.error.empty()) {
      throw svc::Error(svc::ErrorCode::NoValidHypothesis, outcomes.front().row.error);
    }
  });
}

svc_status svc_dataset_simulate(const svc_dataset_options* opts, const svc_config* cfg, uint64_t seed,
                                svc_dataset** out) {
  return guarded([&] {
    require(opts && out, "options and out are required");
    require(opts->setting_count == 0 || opts->outlier_rates, "outlier_rates is required");
    svc::DatasetOptions o;
    o.pairs = opts->pairs;
    o.correspondences = opts->correspondences;
    o.settings.clear();
    for (size_t s = 0; s < opts->setting_count; ++s) {
      o.settings.push_back({opts->outlier_rates[s], opts->decoy_ratios ? opts->decoy_ratios[s] : 0.0});
    }
    o.noise_sigma = opts->noise_sigma;
    o.negatives_per_pair = opts->negatives_per_pair;
    o.sampling.min_overlap = opts->min_overlap;
    o.sampling.max_overlap = opts->max_overlap;
    o.decision.planted_blocker_factor = opts->planted_blocker_factor;
    *out = new svc_dataset{svc::simulate_dataset(o, to_cpp(cfg), seed)};
  });
}

svc_status svc_dataset_save(const svc_dataset* ds, const char* dir) {
  return guarded([&] {
    require(ds && dir, "dataset and dir are required");
    svc::save_dataset(ds->ds, dir);
  });
}

svc_status svc_dataset_load(const char* dir, svc_dataset** out) {
  return guarded([&] {
    require(dir && out, "dir and out are required");
    *out = new svc_dataset{svc::load_dataset(dir)};
  });
}

size_t svc_dataset_pair_count(const svc_dataset* ds) { return ds ? ds->ds.pairs.size() : 0; }
size_t svc_dataset_setting_count(const svc_dataset* ds) { return ds ? ds->ds.settings.size() : 0; }
size_t svc_dataset_decision_count(const svc_dataset* ds) { return ds ? ds->ds.decision.size() : 0; }

svc_status svc_dataset_pair(const svc_dataset* ds, size_t i, svc_cloud** src, svc_cloud** dst, svc_transform* gt) {
  return guarded([&] {
    require(ds, "dataset is required");
    if (i >= ds->ds.pairs.size()) throw svc::Error(svc::ErrorCode::IndexOutOfBounds, "pair index out of range");
    const svc::ScanPair& p = ds->ds.pairs[i];
    if (gt) from_cpp(p.gt, gt);
    svc_cloud* s = src ? new svc_cloud{p.src} : nullptr;
    if (dst) {
      try {
        *dst = new svc_cloud{p.dst};
      } catch (...) {
        delete s;
        throw;
      }
    }
    if (src) *src = s;
  });
}

void svc_dataset_free(svc_dataset* ds) { delete ds; }

svc_status svc_bench(const svc_dataset* ds, const svc_config* cfg, uint64_t seed, const svc_run_options* opts,
                     svc_report** out) {
  return guarded([&] {
    require(ds && out, "dataset and out are required");
    svc::RunOptions o;
    if (opts) {
      o.modes = modes_of(opts->modes);
      o.thresholds = to_cpp(&opts->thresholds);
      o.threads = opts->threads;
      o.timing = opts->timing != 0;
    }
    *out = new svc_report{svc::run_benchmark(ds->ds, to_cpp(cfg), seed, o)};
  });
}

svc_status svc_decide(const svc_dataset* ds, const svc_config* cfg, size_t threads, svc_report** out) {
  return guarded([&] {
    require(ds && out, "dataset and out are required");
    *out = new svc_report{svc::run_decision(ds->ds.pairs, ds->ds.decision, to_cpp(cfg), threads)};
  });
}

size_t svc_report_row_count(const svc_report* report) {
  const auto* r = registration_of(report);
  return r ? r->rows.size() : 0;
}

svc_status svc_report_row(const svc_report* report, size_t i, svc_registration_row* out) {
  return guarded([&] {
    const auto* r = registration_of(report);
    require(r && out, "registration report and out are required");
    if (i >= r->rows.size()) throw svc::Error(svc::ErrorCode::IndexOutOfBounds, "row index out of range");
    const svc::RegistrationRow& row = r->rows[i];
    *out = {row.pair,      mode_flag(row.mode), row.re_deg,           row.te_m,
            row.success,   row.rank,            row.svc_iterations,   row.svc_accepted,
            row.time_ms,   !row.error.empty()};
  });
}

size_t svc_report_summary_count(const svc_report* report) {
  const auto* r = registration_of(report);
  return r ? r->summaries.size() : 0;
}

svc_status svc_report_summary(const svc_report* report, size_t i, svc_registration_summary* out) {
  return guarded([&] {
    const auto* r = registration_of(report);
    require(r && out, "registration report and out are required");
    if (i >= r->summaries.size()) throw svc::Error(svc::ErrorCode::IndexOutOfBounds, "summary index out of range");
    const svc::RegistrationSummary& s = r->summaries[i];
    *out = {mode_flag(s.mode), s.pairs,       s.successes,   s.rr,         s.mean_re_deg,
            s.mean_te_m,       s.time_p50_ms, s.time_p90_ms, s.time_p99_ms};
  });
}

svc_status svc_report_decision(const svc_report* report, svc_decision_counts* svc_counts,
                               svc_decision_counts* accept_all) {
  return guarded([&] {
    const auto* d = report ? std::get_if<svc::DecisionReport>(&report->value) : nullptr;
    require(d != nullptr, "not a decision report");
    auto copy = [](const svc::DecisionCounts& c, svc_decision_counts* o) {
      if (o) *o = {c.tp, c.fp, c.tn, c.fn, c.precision, c.recall, c.f1};
    };
    copy(d->svc, svc_counts);
    copy(d->baseline, accept_all);
  });
}

svc_status svc_report_to_json(const svc_report* report, char** out) {
  return guarded([&] {
    require(report && out, "report and out are required");
    *out = copy_string(std::visit([](const auto& r) { return svc::to_json(r); }, report->value));
  });
}

svc_status svc_report_to_csv(const svc_report* report, char** out) {
  return guarded([&] {
    require(report && out, "report and out are required");
    *out = copy_string(std::visit([](const auto& r) { return svc::to_csv(r); }, report->value));
  });
}

svc_status svc_report_to_text(const svc_report* report, char** out) {
  return guarded([&] {
    require(report && out, "report and out are required");
    const auto* r = registration_of(report);
    *out = copy_string(r ? svc::summary_text(*r) : std::string());
  });
}

void svc_report_free(svc_report* report) { delete report; }

svc_status svc_verdict_to_json(const svc_verdict* v, char** out) {
  return guarded([&] {
    require(v && out, "verdict and out are required");
    *out = copy_string(svc::to_json(to_cpp(v)));
  });
}

svc_status svc_verdict_to_csv(const svc_verdict* v, char** out) {
  return guarded([&] {
    require(v && out, "verdict and out are required");
    *out = copy_string(svc::to_csv(to_cpp(v)));
  });
}

}  // extern "C"
