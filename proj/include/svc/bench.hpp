#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svc/geometry.hpp"
#include "svc/hypothesis.hpp"
#include "svc/metrics.hpp"
#include "svc/scan_sim.hpp"
#include "svc/svc.hpp"

namespace svc {

/// Registration counts as successful when RE < rotation_deg and TE < translation.
struct Thresholds {
  double rotation_deg = 15.0;
  double translation = 0.30;

  static Thresholds indoor() { return {}; }
  static Thresholds outdoor() { return {5.0, 0.60}; }
};

enum class Mode { Svc, NoSvc };
const char* to_string(Mode mode);
/// "svc" or "no-svc"; throws InvalidArgument.
Mode parse_mode(const std::string& name);

struct RegistrationRow {
  std::size_t pair = 0;
  std::string setting;  // correspondence setting label, empty for ad hoc runs
  Mode mode = Mode::Svc;
  double re_deg = 0;  // NaN without ground truth or when registration failed
  double te_m = 0;
  bool success = false;
  std::size_t rank = 0;            // position of the chosen hypothesis in inlier-count order
  std::size_t svc_iterations = 0;  // double checks run, 0 for no-svc
  bool svc_accepted = false;       // false when every hypothesis was rejected (or mode is no-svc)
  double time_ms = 0;
  std::string error;  // non-empty when the pair could not be registered
};

struct RegistrationSummary {
  Mode mode = Mode::Svc;
  std::string setting;
  std::size_t pairs = 0;
  std::size_t successes = 0;
  double rr = 0;           // successes / pairs
  double mean_re_deg = 0;  // over successful pairs only, NaN without any
  double mean_te_m = 0;
  double time_p50_ms = 0;  // nearest-rank percentiles over all pairs
  double time_p90_ms = 0;
  double time_p99_ms = 0;
};

struct RegistrationReport {
  Thresholds thresholds;
  std::vector<RegistrationRow> rows;  // pair-major, modes in request order
  std::vector<RegistrationSummary> summaries;  // one per (setting, mode), first-seen order
};

struct RegistrationOutcome {
  RigidTransform transform;
  RegistrationRow row;
};

/// Generates one hypothesis batch (seeded) and selects from it once per mode,
/// so every mode sees identical hypotheses. Mode no-svc returns the top
/// inlier-count hypothesis. RE/TE and success are filled in when gt is given.
/// A pair without any usable hypothesis yields failed rows with error set and
/// the identity transform.
std::vector<RegistrationOutcome> run_registration(const PointCloud& src, const PointCloud& dst,
                                                  const CorrespondenceSet& corr, const SvcConfig& cfg,
                                                  const std::vector<Mode>& modes, std::uint64_t seed,
                                                  const std::optional<RigidTransform>& gt = std::nullopt,
                                                  const Thresholds& thresholds = {},
                                                  const GeneratorOptions& generator = {});

/// Fills summaries from rows.
void summarize(RegistrationReport& report);

/// Correspondence generation setting; decoy_ratio > 0 adds matches that are
/// consistent with one admissible-range wrong motion per pair.
struct CorrespondenceSetting {
  double outlier_rate = 0.95;
  double decoy_ratio = 0.0;

  std::string label() const;
};

struct DatasetOptions {
  std::size_t pairs = 10;
  std::size_t correspondences = 1000;
  std::vector<CorrespondenceSetting> settings{{0.95, 0.0}};
  double noise_sigma = 0.01;
  std::size_t negatives_per_pair = 0;  // decision samples; 0 skips the decision benchmark
  PairSamplingOptions sampling;
  DecisionOptions decision;
};

struct Dataset {
  std::uint64_t seed = 0;
  std::vector<ScanPair> pairs;
  std::vector<CorrespondenceSetting> settings;
  std::vector<std::vector<CorrespondenceSet>> correspondences;  // [setting][pair]
  std::vector<DecisionSample> decision;
};

/// Deterministic for fixed seed, cfg and options.
Dataset simulate_dataset(const DatasetOptions& options, const SvcConfig& cfg, std::uint64_t seed);

/// Directory layout: manifest.json, pairs/pair_NNNN/{src.ply, dst.ply, gt.txt,
/// corr_S.txt} and decision/sample_NNNN.txt poses. Clouds are binary PLY.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

struct RunOptions {
  std::vector<Mode> modes{Mode::Svc};
  Thresholds thresholds;
  std::size_t threads = 1;
  bool timing = true;  // false zeroes time fields for bit-reproducible reports
  GeneratorOptions generator;
};

/// Every (setting, pair) instance under every mode. Hypothesis seeds derive
/// from seed and the instance, never from scheduling.
RegistrationReport run_benchmark(const Dataset& dataset, const SvcConfig& cfg, std::uint64_t seed,
                                 const RunOptions& options);

struct DecisionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0;  // 0 when nothing was accepted
  double recall = 0;     // 0 without positives
  double f1 = 0;         // 0 when precision + recall is 0

  static DecisionCounts from(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

struct DecisionReport {
  DecisionCounts svc;
  DecisionCounts baseline;  // accepts every transform
  std::vector<SvcVerdict> verdicts;  // per sample, input order
};

/// Double check per labeled sample. Throws EmptyInput on an empty benchmark.
DecisionReport run_decision(const std::vector<ScanPair>& pairs, const std::vector<DecisionSample>& samples,
                            const SvcConfig& cfg, std::size_t threads = 1);

std::string to_json(const RegistrationReport& report);
/// One "pair" record per row followed by one "aggregate" record per summary.
std::string to_csv(const RegistrationReport& report);
std::string to_json(const DecisionReport& report);
std::string to_csv(const DecisionReport& report);
std::string to_json(const SvcVerdict& verdict);
std::string to_csv(const SvcVerdict& verdict);
/// Human-readable table with TE in centimeters.
std::string summary_text(const RegistrationReport& report);

}  // namespace svc
