#include "svc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "svc/error.hpp"
#include "svc/io.hpp"

namespace svc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Runs fn(0..n-1) on up to threads workers; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : ""; }

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string pair_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%04zu", i);
  return buf;
}

std::string sample_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04zu.txt", i);
  return buf;
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::Svc ? "svc" : "no-svc"; }

Mode parse_mode(const std::string& name) {
  if (name == "svc") return Mode::Svc;
  if (name == "no-svc") return Mode::NoSvc;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + name + "'");
}

std::vector<RegistrationOutcome> run_registration(const PointCloud& src, const PointCloud& dst,
                                                  const CorrespondenceSet& corr, const SvcConfig& cfg,
                                                  const std::vector<Mode>& modes, std::uint64_t seed,
                                                  const std::optional<RigidTransform>& gt,
                                                  const Thresholds& thresholds, const GeneratorOptions& generator) {
  corr.validate(src.size(), dst.size());
  std::vector<RegistrationOutcome> out;
  const auto start = std::chrono::steady_clock::now();
  HypothesisBatch batch;
  std::string error;
  try {
    batch = generate(corr, src, dst, cfg, seed, generator);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewCorrespondences && e.code() != ErrorCode::NoValidHypothesis) throw;
    error = e.what();
  }
  const double generation_ms = elapsed_ms(start);

  for (Mode mode : modes) {
    RegistrationOutcome o;
    o.row.mode = mode;
    o.row.re_deg = kNaN;
    o.row.te_m = kNaN;
    if (!error.empty()) {
      o.row.error = error;
      o.row.time_ms = generation_ms;
      out.push_back(std::move(o));
      continue;
    }
    const auto selection_start = std::chrono::steady_clock::now();
    if (mode == Mode::NoSvc) {
      // Same stable ranking as the constrained selection, minus the checks.
      std::vector<std::size_t> order(batch.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return batch.ic_scores[a] > batch.ic_scores[b]; });
      o.transform = batch.transforms[order.front()];
    } else {
      const EvaluationResult r = evaluate_hypotheses(src, dst, corr, batch.transforms, cfg);
      o.transform = r.best;
      o.row.rank = r.best_rank;
      o.row.svc_iterations = r.verdicts.size();
      o.row.svc_accepted = r.accepted;
    }
    o.row.time_ms = generation_ms + elapsed_ms(selection_start);
    if (gt) {
      o.row.re_deg = rotation_error(o.transform, *gt);
      o.row.te_m = translation_error(o.transform, *gt);
      o.row.success = o.row.re_deg < thresholds.rotation_deg && o.row.te_m < thresholds.translation;
    }
    out.push_back(std::move(o));
  }
  return out;
}

void summarize(RegistrationReport& report) {
  report.summaries.clear();
  std::vector<std::vector<const RegistrationRow*>> groups;
  for (const auto& row : report.rows) {
    std::size_t g = 0;
    while (g < report.summaries.size() &&
           !(report.summaries[g].mode == row.mode && report.summaries[g].setting == row.setting)) {
      ++g;
    }
    if (g == report.summaries.size()) {
      RegistrationSummary s;
      s.mode = row.mode;
      s.setting = row.setting;
      report.summaries.push_back(s);
      groups.emplace_back();
    }
    groups[g].push_back(&row);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    RegistrationSummary& s = report.summaries[g];
    double re_sum = 0, te_sum = 0;
    std::vector<double> times;
    for (const auto* row : groups[g]) {
      ++s.pairs;
      times.push_back(row->time_ms);
      if (row->success) {
        ++s.successes;
        re_sum += row->re_deg;
        te_sum += row->te_m;
      }
    }
    s.rr = static_cast<double>(s.successes) / static_cast<double>(s.pairs);
    s.mean_re_deg = s.successes ? re_sum / static_cast<double>(s.successes) : kNaN;
    s.mean_te_m = s.successes ? te_sum / static_cast<double>(s.successes) : kNaN;
    s.time_p50_ms = percentile(times, 0.50);
    s.time_p90_ms = percentile(times, 0.90);
    s.time_p99_ms = percentile(times, 0.99);
  }
}

std::string CorrespondenceSetting::label() const {
  std::string s = "outlier=" + format_double(outlier_rate);
  if (decoy_ratio > 0) s += ";decoy=" + format_double(decoy_ratio);
  return s;
}

Dataset simulate_dataset(const DatasetOptions& options, const SvcConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Dataset ds;
  ds.seed = seed;
  ds.settings = options.settings;
  ds.pairs = simulate_pairs(options.pairs, derive_seed(seed, 0), cfg, options.sampling);

  // One wrong motion per pair, shared by every decoy setting.
  std::vector<std::optional<RigidTransform>> decoys(ds.pairs.size());
  const bool any_decoy = std::any_of(options.settings.begin(), options.settings.end(),
                                     [](const CorrespondenceSetting& s) { return s.decoy_ratio > 0; });
  if (any_decoy) {
    for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
      try {
        const auto b = make_decision_benchmark({ds.pairs[i]}, 1, cfg, derive_seed(derive_seed(seed, 1), i),
                                               options.decision);
        decoys[i] = b.samples.back().transform;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NegativeSamplingFailed) throw;  // pair keeps uniform outliers only
      }
    }
  }

  for (std::size_t s = 0; s < options.settings.size(); ++s) {
    const CorrespondenceSetting& setting = options.settings[s];
    std::vector<CorrespondenceSet> sets;
    for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
      CorrespondenceOptions co;
      co.tau = cfg.tau;
      if (setting.decoy_ratio > 0 && decoys[i]) {
        co.decoy = decoys[i];
        co.decoy_ratio = setting.decoy_ratio;
      }
      const std::uint64_t stream = derive_seed(derive_seed(seed, 2 + s), i);
      sets.push_back(make_correspondences(ds.pairs[i], options.correspondences, setting.outlier_rate,
                                          options.noise_sigma, stream, co)
                         .set);
    }
    ds.correspondences.push_back(std::move(sets));
  }

  if (options.negatives_per_pair > 0) {
    ds.decision = make_decision_benchmark(ds.pairs, options.negatives_per_pair, cfg,
                                          derive_seed(seed, 1000), options.decision)
                      .samples;
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "pairs", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  json manifest;
  manifest["format"] = "svc-dataset-1";
  manifest["seed"] = dataset.seed;
  manifest["settings"] = json::array();
  for (const auto& s : dataset.settings) {
    manifest["settings"].push_back({{"outlier_rate", s.outlier_rate}, {"decoy_ratio", s.decoy_ratio}});
  }
  manifest["pairs"] = json::array();
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    const ScanPair& p = dataset.pairs[i];
    const fs::path pdir = fs::path(dir) / "pairs" / pair_name(i);
    fs::create_directories(pdir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + pdir.string());
    save_cloud(p.src, (pdir / "src.ply").string(), CloudFormat::PlyBinaryLE);
    save_cloud(p.dst, (pdir / "dst.ply").string(), CloudFormat::PlyBinaryLE);
    save_pose(p.gt, (pdir / "gt.txt").string());
    for (std::size_t s = 0; s < dataset.correspondences.size(); ++s) {
      save_correspondences(dataset.correspondences[s][i], (pdir / ("corr_" + std::to_string(s) + ".txt")).string());
    }
    manifest["pairs"].push_back({{"name", pair_name(i)}, {"overlap", p.overlap}});
  }
  manifest["decision"] = json::array();
  if (!dataset.decision.empty()) {
    fs::create_directories(fs::path(dir) / "decision", ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create decision directory");
  }
  for (std::size_t k = 0; k < dataset.decision.size(); ++k) {
    const DecisionSample& d = dataset.decision[k];
    const std::string rel = "decision/" + sample_name(k);
    save_pose(d.transform, (fs::path(dir) / rel).string());
    manifest["decision"].push_back({{"pair", d.pair}, {"positive", d.positive}, {"pose", rel}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + manifest_path.string());
  Dataset ds;
  try {
    const json manifest = json::parse(in);
    if (manifest.value("format", "") != "svc-dataset-1") {
      throw Error(ErrorCode::UnsupportedFormat, manifest_path.string() + ": unknown dataset format");
    }
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& s : manifest.at("settings")) {
      ds.settings.push_back({s.at("outlier_rate").get<double>(), s.at("decoy_ratio").get<double>()});
    }
    ds.correspondences.resize(ds.settings.size());
    for (const auto& entry : manifest.at("pairs")) {
      const fs::path pdir = fs::path(dir) / "pairs" / entry.at("name").get<std::string>();
      ScanPair p{load_cloud((pdir / "src.ply").string()), load_cloud((pdir / "dst.ply").string()),
                 load_pose((pdir / "gt.txt").string()), entry.at("overlap").get<double>()};
      for (std::size_t s = 0; s < ds.settings.size(); ++s) {
        CorrespondenceSet c = load_correspondences((pdir / ("corr_" + std::to_string(s) + ".txt")).string());
        c.validate(p.src.size(), p.dst.size());
        ds.correspondences[s].push_back(std::move(c));
      }
      ds.pairs.push_back(std::move(p));
    }
    for (const auto& entry : manifest.at("decision")) {
      DecisionSample d;
      d.pair = entry.at("pair").get<std::size_t>();
      d.positive = entry.at("positive").get<bool>();
      if (d.pair >= ds.pairs.size()) throw Error(ErrorCode::ParseError, "decision sample refers to a missing pair");
      d.transform = load_pose((fs::path(dir) / entry.at("pose").get<std::string>()).string());
      ds.decision.push_back(d);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, manifest_path.string() + ": " + e.what());
  }
  return ds;
}

RegistrationReport run_benchmark(const Dataset& dataset, const SvcConfig& cfg, std::uint64_t seed,
                                 const RunOptions& options) {
  cfg.validate();
  if (options.modes.empty()) throw Error(ErrorCode::InvalidArgument, "no registration mode requested");
  const std::size_t n_pairs = dataset.pairs.size();
  const std::size_t n_instances = dataset.settings.size() * n_pairs;
  std::vector<std::vector<RegistrationRow>> results(n_instances);
  parallel_for(n_instances, options.threads, [&](std::size_t k) {
    const std::size_t s = k / n_pairs;
    const std::size_t i = k % n_pairs;
    const ScanPair& p = dataset.pairs[i];
    const auto outcomes = run_registration(p.src, p.dst, dataset.correspondences[s][i], cfg, options.modes,
                                           derive_seed(seed, k), p.gt, options.thresholds, options.generator);
    for (const auto& o : outcomes) {
      RegistrationRow row = o.row;
      row.pair = i;
      row.setting = dataset.settings[s].label();
      if (!options.timing) row.time_ms = 0;
      results[k].push_back(std::move(row));
    }
  });
  RegistrationReport report;
  report.thresholds = options.thresholds;
  for (auto& rows : results) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  summarize(report);
  return report;
}

DecisionCounts DecisionCounts::from(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  DecisionCounts c{tp, fp, tn, fn, 0, 0, 0};
  c.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  c.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
  return c;
}

DecisionReport run_decision(const std::vector<ScanPair>& pairs, const std::vector<DecisionSample>& samples,
                            const SvcConfig& cfg, std::size_t threads) {
  cfg.validate();
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "decision benchmark is empty");
  for (const auto& s : samples) {
    if (s.pair >= pairs.size()) throw Error(ErrorCode::IndexOutOfBounds, "decision sample refers to a missing pair");
  }
  // Indices are built once per pair that has samples.
  std::vector<std::size_t> used;
  for (const auto& s : samples) used.push_back(s.pair);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::vector<std::optional<NNIndex>> src_index(pairs.size()), dst_index(pairs.size());
  parallel_for(used.size(), threads, [&](std::size_t k) {
    const std::size_t i = used[k];
    src_index[i] = NNIndex::build(pairs[i].src.points());
    dst_index[i] = NNIndex::build(pairs[i].dst.points());
  });

  DecisionReport report;
  report.verdicts.resize(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) {
    const DecisionSample& s = samples[k];
    const ScanPair& p = pairs[s.pair];
    report.verdicts[k] = svc_double_check(p.src, p.dst, s.transform, *src_index[s.pair], *dst_index[s.pair], cfg);
  });

  std::size_t tp = 0, fp = 0, tn = 0, fn = 0, positives = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const bool accepted = report.verdicts[k].accepted;
    if (samples[k].positive) {
      ++positives;
      accepted ? ++tp : ++fn;
    } else {
      accepted ? ++fp : ++tn;
    }
  }
  report.svc = DecisionCounts::from(tp, fp, tn, fn);
  report.baseline = DecisionCounts::from(positives, samples.size() - positives, 0, 0);
  return report;
}

namespace {

json row_json(const RegistrationRow& r) {
  json j{{"pair", r.pair},
         {"setting", r.setting},
         {"mode", to_string(r.mode)},
         {"re_deg", number(r.re_deg)},
         {"te_m", number(r.te_m)},
         {"success", r.success},
         {"rank", r.rank},
         {"svc_iterations", r.svc_iterations},
         {"svc_accepted", r.svc_accepted},
         {"time_ms", number(r.time_ms)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

json summary_json(const RegistrationSummary& s) {
  return {{"setting", s.setting},
          {"mode", to_string(s.mode)},
          {"pairs", s.pairs},
          {"successes", s.successes},
          {"rr", number(s.rr)},
          {"mean_re_deg", number(s.mean_re_deg)},
          {"mean_te_m", number(s.mean_te_m)},
          {"time_p50_ms", number(s.time_p50_ms)},
          {"time_p90_ms", number(s.time_p90_ms)},
          {"time_p99_ms", number(s.time_p99_ms)}};
}

json counts_json(const DecisionCounts& c) {
  return {{"tp", c.tp},         {"fp", c.fp},           {"tn", c.tn}, {"fn", c.fn},
          {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
}

}  // namespace

std::string to_json(const RegistrationReport& report) {
  json j;
  j["thresholds"] = {{"rotation_deg", report.thresholds.rotation_deg},
                     {"translation_m", report.thresholds.translation}};
  j["note"] = "mean RE/TE average successful pairs only";
  j["pairs"] = json::array();
  for (const auto& r : report.rows) j["pairs"].push_back(row_json(r));
  j["aggregate"] = json::array();
  for (const auto& s : report.summaries) j["aggregate"].push_back(summary_json(s));
  return j.dump(2) + "\n";
}

std::string to_csv(const RegistrationReport& report) {
  std::ostringstream out;
  out << "record,setting,mode,pair,re_deg,te_m,success,rank,svc_iterations,svc_accepted,time_ms,error,"
         "pairs,successes,rr,mean_re_deg,mean_te_m,time_p50_ms,time_p90_ms,time_p99_ms\n";
  for (const auto& r : report.rows) {
    out << "pair," << csv_text(r.setting) << ',' << to_string(r.mode) << ',' << r.pair << ',' << csv_number(r.re_deg)
        << ',' << csv_number(r.te_m) << ',' << (r.success ? 1 : 0) << ',' << r.rank << ',' << r.svc_iterations << ','
        << (r.svc_accepted ? 1 : 0) << ',' << csv_number(r.time_ms) << ',' << csv_text(r.error) << ",,,,,,,,\n";
  }
  for (const auto& s : report.summaries) {
    out << "aggregate," << csv_text(s.setting) << ',' << to_string(s.mode) << ",,,,,,,,,," << s.pairs << ','
        << s.successes << ',' << csv_number(s.rr) << ',' << csv_number(s.mean_re_deg) << ','
        << csv_number(s.mean_te_m) << ',' << csv_number(s.time_p50_ms) << ',' << csv_number(s.time_p90_ms) << ','
        << csv_number(s.time_p99_ms) << '\n';
  }
  return out.str();
}

std::string to_json(const DecisionReport& report) {
  json j;
  j["svc"] = counts_json(report.svc);
  j["accept_all"] = counts_json(report.baseline);
  return j.dump(2) + "\n";
}

std::string to_csv(const DecisionReport& report) {
  std::ostringstream out;
  out << "classifier,tp,fp,tn,fn,precision,recall,f1\n";
  auto line = [&](const char* name, const DecisionCounts& c) {
    out << name << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << ',' << format_double(c.precision)
        << ',' << format_double(c.recall) << ',' << format_double(c.f1) << '\n';
  };
  line("svc", report.svc);
  line("accept_all", report.baseline);
  return out.str();
}

std::string to_json(const SvcVerdict& v) {
  json j{{"accepted", v.accepted},
         {"forward_blocked", v.forward_blocked},
         {"backward_blocked", v.backward_blocked},
         {"forward_budget", v.forward_budget},
         {"backward_budget", v.backward_budget}};
  return j.dump(2) + "\n";
}

std::string to_csv(const SvcVerdict& v) {
  std::ostringstream out;
  out << "accepted,forward_blocked,backward_blocked,forward_budget,backward_budget\n"
      << (v.accepted ? 1 : 0) << ',' << v.forward_blocked << ',' << v.backward_blocked << ',' << v.forward_budget
      << ',' << v.backward_budget << '\n';
  return out.str();
}

std::string summary_text(const RegistrationReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "success: RE < %g deg and TE < %g cm; RE/TE averaged over successes\n",
                report.thresholds.rotation_deg, report.thresholds.translation * 100.0);
  out << line;
  std::snprintf(line, sizeof line, "%-28s %-7s %6s %8s %8s %8s %10s\n", "setting", "mode", "pairs", "RR(%)",
                "RE(deg)", "TE(cm)", "p50(ms)");
  out << line;
  for (const auto& s : report.summaries) {
    std::snprintf(line, sizeof line, "%-28s %-7s %6zu %8.2f %8.3f %8.2f %10.2f\n",
                  s.setting.empty() ? "-" : s.setting.c_str(), to_string(s.mode), s.pairs, 100.0 * s.rr,
                  s.mean_re_deg, 100.0 * s.mean_te_m, s.time_p50_ms);
    out << line;
  }
  return out.str();
}

}  // namespace svc
