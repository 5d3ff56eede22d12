#include "svc/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "svc/error.hpp"

namespace svc {

CorrespondenceSet::CorrespondenceSet(std::vector<Correspondence> pairs) {
  pairs_.reserve(pairs.size());
  for (const auto& c : pairs) add(c);
}

void CorrespondenceSet::add(const Correspondence& c) {
  if (c.weight && !(*c.weight >= 0.0 && *c.weight <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "correspondence weight outside [0, 1]");
  }
  // Linear scan keeps insertion order; sets are at most a few thousand pairs.
  for (const auto& existing : pairs_) {
    if (existing.src == c.src && existing.dst == c.dst) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate correspondence " + std::to_string(c.src) + " " + std::to_string(c.dst));
    }
  }
  pairs_.push_back(c);
}

void CorrespondenceSet::validate(std::size_t src_size, std::size_t dst_size) const {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].src >= src_size || pairs_[i].dst >= dst_size) {
      throw Error(ErrorCode::IndexOutOfBounds, "correspondence " + std::to_string(i) + " is out of bounds");
    }
  }
}

void SvcConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(tau > 0.0)) fail("tau must be > 0");
  if (!(eta1 > 0.0 && eta1 < 1.0)) fail("eta1 must lie in (0, 1)");
  if (!(eta2 >= 0.0 && eta2 < 1.0)) fail("eta2 must lie in [0, 1)");
  if (!(t_threshold > 0.0 && t_threshold < 1.0)) fail("t_threshold must lie in (0, 1)");
  if (k < 1) fail("k must be >= 1");
  if (!(min_range >= 0.0)) fail("min_range must be >= 0");
}

std::vector<double> nn_residuals(const PointCloud& src, const RigidTransform& t, const NNIndex& dst_index) {
  std::vector<double> out;
  out.reserve(src.size());
  for (const auto& p : src.points()) out.push_back(dst_index.nearest(t(p)).distance);
  return out;
}

std::size_t inlier_count(std::span<const double> residuals, double tau) {
  return static_cast<std::size_t>(
      std::count_if(residuals.begin(), residuals.end(), [tau](double r) { return r < tau; }));
}

std::size_t correspondence_inlier_count(const CorrespondenceSet& corr, const PointCloud& src,
                                        const PointCloud& dst, const RigidTransform& t, double tau) {
  corr.validate(src.size(), dst.size());
  std::size_t count = 0;
  for (const auto& c : corr) {
    if ((t(src[c.src]) - dst[c.dst]).norm() < tau) ++count;
  }
  return count;
}

namespace {

template <typename F>
double truncated_mean(std::span<const double> residuals, double tau, F f) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double r : residuals) {
    if (r < tau) {
      sum += f(r);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

double mae(std::span<const double> residuals, double tau) {
  return truncated_mean(residuals, tau, [](double r) { return std::abs(r); });
}

double mse(std::span<const double> residuals, double tau) {
  return truncated_mean(residuals, tau, [](double r) { return r * r; });
}

bool in_range(const PointCloud& src, const NNIndex& dst_index, const RigidTransform& t, const SvcConfig& cfg) {
  const auto residuals = nn_residuals(src, t, dst_index);
  return static_cast<double>(inlier_count(residuals, cfg.tau)) > cfg.eta1 * static_cast<double>(src.size());
}

double overlap_fraction(const PointCloud& src, const NNIndex& dst_index, const RigidTransform& t, double tau) {
  if (src.empty()) return 0.0;
  const auto residuals = nn_residuals(src, t, dst_index);
  return static_cast<double>(inlier_count(residuals, tau)) / static_cast<double>(src.size());
}

}  // namespace svc
