/* C interface to the sight-view-constraint library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns an svc_status; on failure svc_last_error() describes the
 * problem for the calling thread. Strings returned through char** are owned
 * by the caller and released with svc_string_free. */
#ifndef SVC_SVC_H
#define SVC_SVC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SVC_API __declspec(dllexport)
#else
#define SVC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svc_status {
  SVC_OK = 0,
  SVC_ERR_INVALID_ARGUMENT = 1,
  SVC_ERR_DEGENERATE_INPUT = 2,
  SVC_ERR_EMPTY_INPUT = 3,
  SVC_ERR_NOT_UNIT_NORM = 4,
  SVC_ERR_INDEX_OUT_OF_BOUNDS = 5,
  SVC_ERR_ALL_POINTS_DEGENERATE = 6,
  SVC_ERR_EMPTY_HYPOTHESES = 7,
  SVC_ERR_TOO_FEW_CORRESPONDENCES = 8,
  SVC_ERR_NO_VALID_HYPOTHESIS = 9,
  SVC_ERR_EMPTY_SCAN = 10,
  SVC_ERR_NEGATIVE_SAMPLING_FAILED = 11,
  SVC_ERR_INSUFFICIENT_OVERLAP = 12,
  SVC_ERR_PARSE = 13,
  SVC_ERR_UNSUPPORTED_FORMAT = 14,
  SVC_ERR_INVALID_ROTATION = 15,
  SVC_ERR_IO = 16,
  SVC_ERR_INTERNAL = 99
} svc_status;

typedef struct svc_cloud svc_cloud;
typedef struct svc_correspondences svc_correspondences;
typedef struct svc_dataset svc_dataset;
typedef struct svc_report svc_report;

/* Row-major 4x4 homogeneous matrix. */
typedef struct svc_transform {
  double m[16];
} svc_transform;

typedef struct svc_config {
  double tau;
  double eta1;
  double eta2;
  double t_threshold;
  size_t k;
  double min_range;
} svc_config;

typedef struct svc_thresholds {
  double rotation_deg;
  double translation;
} svc_thresholds;

typedef struct svc_verdict {
  int accepted;
  size_t forward_blocked;
  size_t backward_blocked;
  size_t forward_budget;
  size_t backward_budget;
} svc_verdict;

typedef enum svc_mode { SVC_MODE_SVC = 1, SVC_MODE_NO_SVC = 2, SVC_MODE_BOTH = 3 } svc_mode;

typedef struct svc_registration_row {
  size_t pair;
  int mode; /* SVC_MODE_SVC or SVC_MODE_NO_SVC */
  double re_deg;
  double te_m;
  int success;
  size_t rank;
  size_t svc_iterations;
  int svc_accepted;
  double time_ms;
  int failed; /* no hypothesis could be formed */
} svc_registration_row;

typedef struct svc_registration_summary {
  int mode;
  size_t pairs;
  size_t successes;
  double rr;
  double mean_re_deg;
  double mean_te_m;
  double time_p50_ms;
  double time_p90_ms;
  double time_p99_ms;
} svc_registration_summary;

typedef struct svc_decision_counts {
  size_t tp, fp, tn, fn;
  double precision, recall, f1;
} svc_decision_counts;

typedef struct svc_dataset_options {
  size_t pairs;
  size_t correspondences;
  const double* outlier_rates; /* settings, count entries */
  const double* decoy_ratios;  /* may be NULL for no decoys */
  size_t setting_count;
  double noise_sigma;
  size_t negatives_per_pair;
  double min_overlap;
  double max_overlap;
  double planted_blocker_factor;
} svc_dataset_options;

typedef struct svc_run_options {
  int modes; /* svc_mode bit set */
  svc_thresholds thresholds;
  size_t threads;
  int timing; /* 0 zeroes time fields */
} svc_run_options;

SVC_API const char* svc_version(void);
SVC_API const char* svc_status_string(svc_status status);
/* Message of the last failed call on this thread, "" if none. */
SVC_API const char* svc_last_error(void);
SVC_API void svc_string_free(char* s);

SVC_API void svc_config_default(svc_config* cfg);
SVC_API void svc_config_outdoor(svc_config* cfg);
/* Applies the key=value entries of path on top of *cfg. Unknown keys fail. */
SVC_API svc_status svc_config_load(const char* path, svc_config* cfg);
SVC_API void svc_thresholds_indoor(svc_thresholds* t);
SVC_API void svc_thresholds_outdoor(svc_thresholds* t);
SVC_API void svc_transform_identity(svc_transform* t);
SVC_API void svc_dataset_options_default(svc_dataset_options* opts);
SVC_API void svc_run_options_default(svc_run_options* opts);

/* xyz holds 3 * n doubles; viewpoint may be NULL for the origin. */
SVC_API svc_status svc_cloud_create(const double* xyz, size_t n, const double* viewpoint, svc_cloud** out);
/* format is "ply-ascii", "ply-binary-le", "xyz-text" or NULL to detect. */
SVC_API svc_status svc_cloud_load(const char* path, const char* format, svc_cloud** out);
SVC_API svc_status svc_cloud_save(const svc_cloud* cloud, const char* path, const char* format);
SVC_API size_t svc_cloud_size(const svc_cloud* cloud);
/* Copies up to capacity points (3 doubles each); returns the count copied. */
SVC_API size_t svc_cloud_points(const svc_cloud* cloud, double* xyz, size_t capacity);
SVC_API void svc_cloud_viewpoint(const svc_cloud* cloud, double out[3]);
SVC_API void svc_cloud_free(svc_cloud* cloud);

SVC_API svc_status svc_correspondences_create(svc_correspondences** out);
/* weight < 0 means no weight. */
SVC_API svc_status svc_correspondences_add(svc_correspondences* corr, size_t src, size_t dst, double weight);
SVC_API svc_status svc_correspondences_load(const char* path, svc_correspondences** out);
SVC_API svc_status svc_correspondences_save(const svc_correspondences* corr, const char* path);
SVC_API size_t svc_correspondences_size(const svc_correspondences* corr);
SVC_API void svc_correspondences_free(svc_correspondences* corr);

SVC_API svc_status svc_pose_load(const char* path, svc_transform* out);
SVC_API svc_status svc_pose_save(const svc_transform* t, const char* path);
SVC_API svc_status svc_rotation_error(const svc_transform* a, const svc_transform* b, double* deg);
SVC_API svc_status svc_translation_error(const svc_transform* a, const svc_transform* b, double* meters);

/* Double check of one transform mapping src into dst. */
SVC_API svc_status svc_verify(const svc_cloud* src, const svc_cloud* dst, const svc_transform* t,
                              const svc_config* cfg, svc_verdict* out);

/* Registers one pair under a single mode. gt may be NULL; report may be NULL.
 * Returns SVC_ERR_NO_VALID_HYPOTHESIS, with the report still filled, when no
 * hypothesis can be formed. */
SVC_API svc_status svc_register(const svc_cloud* src, const svc_cloud* dst, const svc_correspondences* corr,
                                const svc_config* cfg, svc_mode mode, uint64_t seed, const svc_transform* gt,
                                const svc_thresholds* thresholds, svc_transform* out, svc_report** report);

SVC_API svc_status svc_dataset_simulate(const svc_dataset_options* opts, const svc_config* cfg, uint64_t seed,
                                        svc_dataset** out);
SVC_API svc_status svc_dataset_save(const svc_dataset* ds, const char* dir);
SVC_API svc_status svc_dataset_load(const char* dir, svc_dataset** out);
SVC_API size_t svc_dataset_pair_count(const svc_dataset* ds);
SVC_API size_t svc_dataset_setting_count(const svc_dataset* ds);
SVC_API size_t svc_dataset_decision_count(const svc_dataset* ds);
/* New handles for the clouds of pair i; any out pointer may be NULL. */
SVC_API svc_status svc_dataset_pair(const svc_dataset* ds, size_t i, svc_cloud** src, svc_cloud** dst,
                                    svc_transform* gt);
SVC_API void svc_dataset_free(svc_dataset* ds);

SVC_API svc_status svc_bench(const svc_dataset* ds, const svc_config* cfg, uint64_t seed,
                             const svc_run_options* opts, svc_report** out);
SVC_API svc_status svc_decide(const svc_dataset* ds, const svc_config* cfg, size_t threads, svc_report** out);

SVC_API size_t svc_report_row_count(const svc_report* report);
SVC_API svc_status svc_report_row(const svc_report* report, size_t i, svc_registration_row* out);
SVC_API size_t svc_report_summary_count(const svc_report* report);
SVC_API svc_status svc_report_summary(const svc_report* report, size_t i, svc_registration_summary* out);
/* Fails with SVC_ERR_INVALID_ARGUMENT unless the report came from svc_decide. */
SVC_API svc_status svc_report_decision(const svc_report* report, svc_decision_counts* svc,
                                       svc_decision_counts* accept_all);
SVC_API svc_status svc_report_to_json(const svc_report* report, char** out);
SVC_API svc_status svc_report_to_csv(const svc_report* report, char** out);
/* Human-readable registration table; empty for decision reports. */
SVC_API svc_status svc_report_to_text(const svc_report* report, char** out);
SVC_API void svc_report_free(svc_report* report);

SVC_API svc_status svc_verdict_to_json(const svc_verdict* v, char** out);
SVC_API svc_status svc_verdict_to_csv(const svc_verdict* v, char** out);

#ifdef __cplusplus
}
#endif

#endif
