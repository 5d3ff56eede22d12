#pragma once

#include <map>
#include <string>

#include "svc/geometry.hpp"
#include "svc/metrics.hpp"

namespace svc {

enum class CloudFormat { PlyAscii, PlyBinaryLE, XyzText };

/// "ply-ascii", "ply-binary-le" or "xyz-text"; throws UnsupportedFormat.
CloudFormat parse_cloud_format(const std::string& name);
const char* to_string(CloudFormat format);
/// .ply files are probed for their header format; .xyz/.txt are XYZ text.
CloudFormat detect_cloud_format(const std::string& path);

/// Points in file order. A "comment viewpoint x y z" header line (or
/// "# viewpoint x y z" in XYZ text) sets the viewpoint, else the origin.
/// PLY needs a vertex element with float or double x, y, z properties.
/// Throws IoError, ParseError (with line or byte offset) or UnsupportedFormat.
PointCloud load_cloud(const std::string& path, CloudFormat format);
PointCloud load_cloud(const std::string& path);
void save_cloud(const PointCloud& pc, const std::string& path, CloudFormat format);

/// 4x4 row-major homogeneous matrix as whitespace-separated text.
RigidTransform load_pose(const std::string& path);
void save_pose(const RigidTransform& t, const std::string& path);
RigidTransform parse_pose(const std::string& text);
std::string format_pose(const RigidTransform& t);

/// One "i j [w]" line per pair; '#' starts a comment.
CorrespondenceSet load_correspondences(const std::string& path);
void save_correspondences(const CorrespondenceSet& corr, const std::string& path);

/// key=value lines; '#' starts a comment. Returns the raw entries.
std::map<std::string, std::string> load_key_values(const std::string& path);
/// Applies tau, eta1, eta2, t_threshold, k and min_range entries to cfg and
/// removes them from entries. Throws ParseError on malformed values.
void apply_config(std::map<std::string, std::string>& entries, SvcConfig& cfg);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace svc
