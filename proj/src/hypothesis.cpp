#include "svc/hypothesis.hpp"

#include <cmath>
#include <random>

#include "svc/error.hpp"

namespace svc {

namespace {

// Row-major boolean matrix of pairwise length consistency.
class CompatibilityMatrix {
 public:
  CompatibilityMatrix(const CorrespondenceSet& corr, const PointCloud& src, const PointCloud& dst, double tau_c)
      : n_(corr.size()), bits_(n_ * n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      const Point3& pi = src[corr[i].src];
      const Point3& qi = dst[corr[i].dst];
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double dp = (pi - src[corr[j].src]).norm();
        const double dq = (qi - dst[corr[j].dst]).norm();
        const std::uint8_t ok = std::abs(dp - dq) < tau_c ? 1 : 0;
        bits_[i * n_ + j] = ok;
        bits_[j * n_ + i] = ok;
      }
    }
  }

  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

std::vector<double> weights_from(const CompatibilityMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && m(i, j)) ++count;
    }
    w[i] = static_cast<double>(count) / static_cast<double>(n - 1);
  }
  return w;
}

// Draws one element of candidates with probability proportional to weight + floor.
std::size_t weighted_pick(const std::vector<std::size_t>& candidates, const std::vector<double>& w,
                          std::mt19937_64& rng) {
  constexpr double kFloor = 1e-3;
  double total = 0.0;
  for (std::size_t c : candidates) total += w[c] + kFloor;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t c : candidates) {
    u -= w[c] + kFloor;
    if (u < 0.0) return c;
  }
  return candidates.back();
}

}  // namespace

std::vector<double> compatibility_weights(const CorrespondenceSet& corr, const PointCloud& src,
                                          const PointCloud& dst, double tau_c) {
  if (corr.size() < 2) throw Error(ErrorCode::TooFewCorrespondences, "need at least 2 correspondences");
  corr.validate(src.size(), dst.size());
  return weights_from(CompatibilityMatrix(corr, src, dst, tau_c));
}

HypothesisBatch generate(const CorrespondenceSet& corr, const PointCloud& src, const PointCloud& dst,
                         const SvcConfig& cfg, std::uint64_t seed, const GeneratorOptions& options) {
  cfg.validate();
  if (corr.size() < 3) throw Error(ErrorCode::TooFewCorrespondences, "need at least 3 correspondences");
  corr.validate(src.size(), dst.size());

  const double tau_c = options.tau_c > 0.0 ? options.tau_c : cfg.tau;
  const CompatibilityMatrix compat(corr, src, dst, tau_c);
  const std::vector<double> w = weights_from(compat);
  const std::size_t n = corr.size();

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  std::mt19937_64 rng(seed);
  HypothesisBatch batch;
  std::vector<std::size_t> candidates;
  candidates.reserve(n);

  for (std::size_t iter = 0; iter < cfg.k; ++iter) {
    // Seed correspondence, then partners consistent with everything drawn so far.
    std::array<std::size_t, 3> triple{};
    triple[0] = weighted_pick(all, w, rng);
    for (int slot = 1; slot < 3; ++slot) {
      candidates.clear();
      for (std::size_t j = 0; j < n; ++j) {
        bool ok = true;
        for (int s = 0; s < slot; ++s) ok = ok && j != triple[s] && compat(j, triple[s]);
        if (ok) candidates.push_back(j);
      }
      if (candidates.empty()) {
        for (std::size_t j = 0; j < n; ++j) {
          bool fresh = true;
          for (int s = 0; s < slot; ++s) fresh = fresh && j != triple[s];
          if (fresh) candidates.push_back(j);
        }
      }
      triple[slot] = weighted_pick(candidates, w, rng);
    }

    std::vector<Point3> ps;
    std::vector<Point3> qs;
    for (std::size_t c : triple) {
      ps.push_back(src[corr[c].src]);
      qs.push_back(dst[corr[c].dst]);
    }
    RigidTransform t;
    try {
      t = fit_rigid(ps, qs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateInput) throw;
      continue;
    }

    for (int r = 0; r < options.refine_iterations; ++r) {
      ps.clear();
      qs.clear();
      for (const auto& c : corr) {
        if ((t(src[c.src]) - dst[c.dst]).norm() < cfg.tau) {
          ps.push_back(src[c.src]);
          qs.push_back(dst[c.dst]);
        }
      }
      if (ps.size() < 3) break;
      try {
        t = fit_rigid(ps, qs);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateInput) throw;
        break;
      }
    }

    const std::size_t ic = correspondence_inlier_count(corr, src, dst, t, cfg.tau);
    bool merged = false;
    for (std::size_t h = 0; h < batch.size(); ++h) {
      if (rotation_error(batch.transforms[h], t) < options.dedup_rotation_deg &&
          translation_error(batch.transforms[h], t) < options.dedup_translation_frac * cfg.tau) {
        if (ic > batch.ic_scores[h]) {
          batch.transforms[h] = t;
          batch.ic_scores[h] = ic;
          batch.provenance[h] = triple;
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      batch.transforms.push_back(t);
      batch.ic_scores.push_back(ic);
      batch.provenance.push_back(triple);
    }
  }

  if (batch.empty()) throw Error(ErrorCode::NoValidHypothesis, "every sampled triple was degenerate");
  return batch;
}

}  // namespace svc
