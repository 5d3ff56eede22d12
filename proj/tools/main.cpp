// Command-line front end over the C interface.
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svc/svc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct CallFailed {
  svc_status status;
  std::string message;
};

void check(svc_status s) {
  if (s != SVC_OK) throw CallFailed{s, svc_last_error()};
}

int exit_code_for(svc_status s) {
  switch (s) {
    case SVC_ERR_IO:
    case SVC_ERR_PARSE:
    case SVC_ERR_UNSUPPORTED_FORMAT:
    case SVC_ERR_INVALID_ROTATION:
      return kExitIo;
    case SVC_ERR_INVALID_ARGUMENT:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Cloud = std::unique_ptr<svc_cloud, Deleter<svc_cloud, svc_cloud_free>>;
using Corr = std::unique_ptr<svc_correspondences, Deleter<svc_correspondences, svc_correspondences_free>>;
using DatasetPtr = std::unique_ptr<svc_dataset, Deleter<svc_dataset, svc_dataset_free>>;
using Report = std::unique_ptr<svc_report, Deleter<svc_report, svc_report_free>>;

struct Str {
  char* p = nullptr;
  ~Str() { svc_string_free(p); }
};

struct Globals {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string format = "json";
  std::string config_file;
  bool outdoor = false;
  bool no_timing = false;
  std::optional<double> tau, eta1, eta2, t_threshold, min_range;
  std::optional<std::size_t> k;
};

// Defaults, then the config file, then explicit flags.
svc_config make_config(const Globals& g) {
  svc_config cfg;
  if (g.outdoor) {
    svc_config_outdoor(&cfg);
  } else {
    svc_config_default(&cfg);
  }
  if (!g.config_file.empty()) check(svc_config_load(g.config_file.c_str(), &cfg));
  if (g.tau) cfg.tau = *g.tau;
  if (g.eta1) cfg.eta1 = *g.eta1;
  if (g.eta2) cfg.eta2 = *g.eta2;
  if (g.t_threshold) cfg.t_threshold = *g.t_threshold;
  if (g.min_range) cfg.min_range = *g.min_range;
  if (g.k) cfg.k = *g.k;
  return cfg;
}

svc_thresholds make_thresholds(const Globals& g) {
  svc_thresholds t;
  if (g.outdoor) {
    svc_thresholds_outdoor(&t);
  } else {
    svc_thresholds_indoor(&t);
  }
  return t;
}

void print_report(const svc_report* report, const Globals& g, bool summary) {
  Str text;
  check(g.format == "csv" ? svc_report_to_csv(report, &text.p) : svc_report_to_json(report, &text.p));
  std::fputs(text.p, stdout);
  if (summary) {
    Str table;
    check(svc_report_to_text(report, &table.p));
    std::fputs(table.p, stderr);
  }
}

Cloud load_cloud(const std::string& path) {
  svc_cloud* c = nullptr;
  check(svc_cloud_load(path.c_str(), nullptr, &c));
  return Cloud(c);
}

struct SimulateArgs {
  std::size_t pairs = 10;
  std::size_t correspondences = 1000;
  std::vector<double> outlier_rates{0.95};
  std::vector<double> decoy_ratios;
  double noise = 0.01;
  std::size_t negatives = 0;
  double min_overlap = 0.10;
  double max_overlap = 0.30;
  double planted_factor = 0.0;
};

void add_simulate_options(CLI::App* app, SimulateArgs& a) {
  app->add_option("--pairs", a.pairs, "Scan pairs to simulate")->capture_default_str();
  app->add_option("--correspondences", a.correspondences, "Putative matches per pair")->capture_default_str();
  app->add_option("--outlier-rates", a.outlier_rates, "One correspondence setting per rate")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--decoy-ratios", a.decoy_ratios, "Decoy matches per inlier, one per rate (default 0)")
      ->delimiter(',');
  app->add_option("--noise", a.noise, "Inlier noise sigma in meters")->capture_default_str();
  app->add_option("--negatives", a.negatives, "Decision negatives per pair")->capture_default_str();
  app->add_option("--min-overlap", a.min_overlap)->capture_default_str();
  app->add_option("--max-overlap", a.max_overlap)->capture_default_str();
  app->add_option("--planted-factor", a.planted_factor,
                  "Guaranteed blockers per negative, in multiples of the blocked budget")
      ->capture_default_str();
}

DatasetPtr simulate(const SimulateArgs& a, const svc_config& cfg, std::uint64_t seed) {
  if (!a.decoy_ratios.empty() && a.decoy_ratios.size() != a.outlier_rates.size()) {
    throw CLI::ValidationError("--decoy-ratios", "needs one value per outlier rate");
  }
  svc_dataset_options o;
  svc_dataset_options_default(&o);
  o.pairs = a.pairs;
  o.correspondences = a.correspondences;
  o.outlier_rates = a.outlier_rates.data();
  o.decoy_ratios = a.decoy_ratios.empty() ? nullptr : a.decoy_ratios.data();
  o.setting_count = a.outlier_rates.size();
  o.noise_sigma = a.noise;
  o.negatives_per_pair = a.negatives;
  o.min_overlap = a.min_overlap;
  o.max_overlap = a.max_overlap;
  o.planted_blocker_factor = a.planted_factor;
  svc_dataset* ds = nullptr;
  check(svc_dataset_simulate(&o, &cfg, seed, &ds));
  return DatasetPtr(ds);
}

DatasetPtr dataset_from(const std::string& dir, const SimulateArgs& a, const svc_config& cfg, std::uint64_t seed) {
  if (dir.empty()) return simulate(a, cfg, seed);
  svc_dataset* ds = nullptr;
  check(svc_dataset_load(dir.c_str(), &ds));
  return DatasetPtr(ds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sight view constraint tools for point cloud registration"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--config", g.config_file, "key=value file (tau, eta1, eta2, t_threshold, k, min_range)");
  app.add_flag("--outdoor", g.outdoor, "Outdoor preset: tau 0.6 m, success (5 deg, 0.6 m)");
  app.add_flag("--no-timing", g.no_timing, "Zero timing fields for reproducible reports");
  app.add_option("--tau", g.tau, "Inlier tolerance in meters");
  app.add_option("--eta1", g.eta1, "Minimum overlap fraction");
  app.add_option("--eta2", g.eta2, "Blocked budget fraction");
  app.add_option("--t-threshold", g.t_threshold, "Same-sight dot-product bound");
  app.add_option("--k", g.k, "Hypothesis count");
  app.add_option("--min-range", g.min_range, "Sensor dead zone in meters");

  std::string src_path, dst_path, corr_path, gt_path, pose_path, out_path, mode = "svc", data_dir;
  SimulateArgs sim;

  auto* reg = app.add_subcommand("register", "Register one pair from putative correspondences");
  reg->add_option("--src", src_path, "Source cloud")->required();
  reg->add_option("--dst", dst_path, "Target cloud")->required();
  reg->add_option("--corr", corr_path, "Correspondence file")->required();
  reg->add_option("--gt", gt_path, "Ground-truth pose for RE/TE and success");
  reg->add_option("--out", out_path, "Write the chosen pose here");
  reg->add_option("--mode", mode)->check(CLI::IsMember({"svc", "no-svc"}))->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Check one transform with the sight view constraint");
  verify->add_option("--src", src_path, "Source cloud")->required();
  verify->add_option("--dst", dst_path, "Target cloud")->required();
  verify->add_option("--pose", pose_path, "Transform mapping source into target")->required();

  auto* decide = app.add_subcommand("decide", "Classify labeled transforms and compare with accept-all");
  decide->add_option("--data", data_dir, "Dataset directory; simulated when omitted");
  add_simulate_options(decide, sim);

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a dataset and write it to a directory");
  simulate_cmd->add_option("--out", out_path, "Output directory")->required();
  add_simulate_options(simulate_cmd, sim);

  auto* bench = app.add_subcommand("bench", "Registration recall over a dataset");
  bench->add_option("--data", data_dir, "Dataset directory; simulated when omitted");
  bench->add_option("--mode", mode)->check(CLI::IsMember({"svc", "no-svc", "both"}))->capture_default_str();
  add_simulate_options(bench, sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const svc_config cfg = make_config(g);
    const svc_thresholds thresholds = make_thresholds(g);

    if (*reg) {
      const Cloud src = load_cloud(src_path), dst = load_cloud(dst_path);
      svc_correspondences* c = nullptr;
      check(svc_correspondences_load(corr_path.c_str(), &c));
      const Corr corr(c);
      svc_transform gt;
      if (!gt_path.empty()) check(svc_pose_load(gt_path.c_str(), &gt));
      svc_transform result;
      svc_report* r = nullptr;
      const svc_status s = svc_register(src.get(), dst.get(), corr.get(), &cfg,
                                        mode == "svc" ? SVC_MODE_SVC : SVC_MODE_NO_SVC, g.seed,
                                        gt_path.empty() ? nullptr : &gt, &thresholds, &result, &r);
      const std::string message = svc_last_error();
      const Report report(r);
      if (report) print_report(report.get(), g, false);
      if (s != SVC_OK) throw CallFailed{s, message};
      if (!out_path.empty()) check(svc_pose_save(&result, out_path.c_str()));
      svc_registration_row row;
      check(svc_report_row(report.get(), 0, &row));
      return gt_path.empty() || row.success ? kExitOk : kExitFailure;
    }

    if (*verify) {
      const Cloud src = load_cloud(src_path), dst = load_cloud(dst_path);
      svc_transform t;
      check(svc_pose_load(pose_path.c_str(), &t));
      svc_verdict v;
      check(svc_verify(src.get(), dst.get(), &t, &cfg, &v));
      Str text;
      check(g.format == "csv" ? svc_verdict_to_csv(&v, &text.p) : svc_verdict_to_json(&v, &text.p));
      std::fputs(text.p, stdout);
      return v.accepted ? kExitOk : kExitFailure;
    }

    if (*decide) {
      if (data_dir.empty() && sim.negatives == 0) sim.negatives = 1;
      const DatasetPtr ds = dataset_from(data_dir, sim, cfg, g.seed);
      svc_report* r = nullptr;
      check(svc_decide(ds.get(), &cfg, g.threads, &r));
      const Report report(r);
      print_report(report.get(), g, false);
      return kExitOk;
    }

    if (*simulate_cmd) {
      const DatasetPtr ds = simulate(sim, cfg, g.seed);
      check(svc_dataset_save(ds.get(), out_path.c_str()));
      std::fprintf(stderr, "wrote %zu pairs, %zu settings, %zu decision samples to %s\n",
                   svc_dataset_pair_count(ds.get()), svc_dataset_setting_count(ds.get()),
                   svc_dataset_decision_count(ds.get()), out_path.c_str());
      return kExitOk;
    }

    if (*bench) {
      const DatasetPtr ds = dataset_from(data_dir, sim, cfg, g.seed);
      svc_run_options o;
      svc_run_options_default(&o);
      o.modes = mode == "both" ? SVC_MODE_BOTH : mode == "svc" ? SVC_MODE_SVC : SVC_MODE_NO_SVC;
      o.thresholds = thresholds;
      o.threads = g.threads;
      o.timing = g.no_timing ? 0 : 1;
      svc_report* r = nullptr;
      check(svc_bench(ds.get(), &cfg, g.seed, &o, &r));
      const Report report(r);
      print_report(report.get(), g, true);
      return kExitOk;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CallFailed& e) {
    std::cerr << "error: " << svc_status_string(e.status) << ": " << e.message << "\n";
    return exit_code_for(e.status);
  }
  return kExitUsage;
}
