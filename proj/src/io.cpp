#include "svc/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "svc/error.hpp"

namespace svc {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << data;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_index(const std::string& tok, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line) + ": " + what);
}

bool read_viewpoint(const std::vector<std::string>& toks, std::size_t first, Point3& vp) {
  if (toks.size() != first + 3) return false;
  for (int k = 0; k < 3; ++k) {
    if (!parse_number(toks[first + k], vp[k])) return false;
  }
  return true;
}

struct PlyProperty {
  std::string name;
  std::string type;
  std::size_t size = 0;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

bool is_real(const std::string& t) { return t == "float" || t == "float32" || t == "double" || t == "float64"; }

PointCloud load_ply(const std::string& path, const std::string& data, CloudFormat expected) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= data.size()) return false;
    const auto nl = data.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? data.size() : nl;
    line = data.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = nl == std::string::npos ? data.size() : nl + 1;
    ++line_no;
    return true;
  };

  std::string line;
  if (!next_line(line) || strip(line) != "ply") parse_fail(path, 1, "missing 'ply' magic");
  std::string format;
  Point3 viewpoint = Point3::Zero();
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (next_line(line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "end_header") {
      header_done = true;
      break;
    }
    if (toks[0] == "format") {
      if (toks.size() < 2) parse_fail(path, line_no, "malformed format line");
      format = toks[1];
    } else if (toks[0] == "comment" || toks[0] == "obj_info") {
      if (toks.size() >= 2 && toks[0] == "comment" && toks[1] == "viewpoint" && !read_viewpoint(toks, 2, viewpoint)) {
        parse_fail(path, line_no, "malformed viewpoint comment");
      }
    } else if (toks[0] == "element") {
      std::size_t count = 0;
      if (toks.size() != 3 || !parse_index(toks[2], count)) parse_fail(path, line_no, "malformed element line");
      elements.push_back({toks[1], count, {}});
    } else if (toks[0] == "property") {
      if (elements.empty()) parse_fail(path, line_no, "property before any element");
      PlyProperty prop;
      if (toks.size() == 5 && toks[1] == "list") {
        prop.is_list = true;
        prop.type = toks[3];
        prop.name = toks[4];
        prop.size = ply_type_size(toks[2]);
        if (prop.size == 0 || ply_type_size(toks[3]) == 0) parse_fail(path, line_no, "unknown list type");
      } else if (toks.size() == 3) {
        prop.type = toks[1];
        prop.name = toks[2];
        prop.size = ply_type_size(prop.type);
        if (prop.size == 0) parse_fail(path, line_no, "unknown property type " + prop.type);
      } else {
        parse_fail(path, line_no, "malformed property line");
      }
      elements.back().properties.push_back(prop);
    } else {
      parse_fail(path, line_no, "unexpected header keyword " + toks[0]);
    }
  }
  if (!header_done) parse_fail(path, line_no, "header is not terminated by end_header");

  CloudFormat actual;
  if (format == "ascii") {
    actual = CloudFormat::PlyAscii;
  } else if (format == "binary_little_endian") {
    actual = CloudFormat::PlyBinaryLE;
  } else {
    throw Error(ErrorCode::UnsupportedFormat, path + ": PLY format '" + format + "' is not supported");
  }
  if (actual != expected) {
    throw Error(ErrorCode::UnsupportedFormat, path + ": file is " + format + ", expected " + to_string(expected));
  }

  const auto vertex_it =
      std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) parse_fail(path, line_no, "no vertex element");
  int axis_prop[3] = {-1, -1, -1};
  for (std::size_t i = 0; i < vertex_it->properties.size(); ++i) {
    const auto& p = vertex_it->properties[i];
    const int axis = p.name == "x" ? 0 : p.name == "y" ? 1 : p.name == "z" ? 2 : -1;
    if (axis < 0) continue;
    if (p.is_list || !is_real(p.type)) {
      throw Error(ErrorCode::UnsupportedFormat, path + ": vertex " + p.name + " must be float or double");
    }
    axis_prop[axis] = static_cast<int>(i);
  }
  if (axis_prop[0] < 0 || axis_prop[1] < 0 || axis_prop[2] < 0) parse_fail(path, line_no, "vertex lacks x, y or z");

  std::vector<Point3> points;
  points.reserve(vertex_it->count);

  if (actual == CloudFormat::PlyAscii) {
    for (auto el = elements.begin(); el != elements.end(); ++el) {
      for (std::size_t n = 0; n < el->count; ++n) {
        if (!next_line(line)) parse_fail(path, line_no + 1, "unexpected end of file in element " + el->name);
        if (el != vertex_it) continue;
        const auto toks = split_ws(line);
        if (toks.size() != el->properties.size()) parse_fail(path, line_no, "wrong number of vertex values");
        Point3 p;
        for (int k = 0; k < 3; ++k) {
          if (!parse_number(toks[axis_prop[k]], p[k])) parse_fail(path, line_no, "bad number '" + toks[axis_prop[k]] + "'");
        }
        points.push_back(p);
      }
      if (el == vertex_it) break;
    }
  } else {
    auto need = [&](std::size_t bytes) {
      if (pos + bytes > data.size()) {
        throw Error(ErrorCode::ParseError, path + ": offset " + std::to_string(pos) + ": truncated binary body");
      }
    };
    for (auto el = elements.begin(); el != elements.end(); ++el) {
      for (std::size_t n = 0; n < el->count; ++n) {
        Point3 p = Point3::Zero();
        for (std::size_t i = 0; i < el->properties.size(); ++i) {
          const auto& prop = el->properties[i];
          if (prop.is_list) {
            if (el == vertex_it) throw Error(ErrorCode::UnsupportedFormat, path + ": list property in vertex element");
            // Lists are only skipped; count is an unsigned integer of prop.size bytes.
            need(prop.size);
            std::uint64_t count = 0;
            std::memcpy(&count, data.data() + pos, prop.size);
            pos += prop.size;
            need(count * ply_type_size(prop.type));
            pos += count * ply_type_size(prop.type);
            continue;
          }
          need(prop.size);
          if (el == vertex_it) {
            const int axis = static_cast<int>(i) == axis_prop[0] ? 0 : static_cast<int>(i) == axis_prop[1] ? 1
                           : static_cast<int>(i) == axis_prop[2] ? 2 : -1;
            if (axis >= 0) {
              if (prop.size == 4) {
                float f;
                std::memcpy(&f, data.data() + pos, 4);
                p[axis] = f;
              } else {
                std::memcpy(&p[axis], data.data() + pos, 8);
              }
            }
          }
          pos += prop.size;
        }
        if (el == vertex_it) points.push_back(p);
      }
      if (el == vertex_it) break;
    }
  }
  try {
    return PointCloud(std::move(points), viewpoint);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

PointCloud load_xyz(const std::string& path, const std::string& data) {
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  Point3 viewpoint = Point3::Zero();
  std::vector<Point3> points;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "comment" || toks[0][0] == '#') {
      // "comment viewpoint x y z", "# viewpoint x y z" or "#viewpoint x y z"
      std::size_t first = 1;
      if (toks[0] == "#viewpoint") first = 1;
      else if (toks.size() >= 2 && toks[1] == "viewpoint") first = 2;
      else continue;
      if (!read_viewpoint(toks, first, viewpoint)) parse_fail(path, line_no, "malformed viewpoint comment");
      continue;
    }
    if (toks.size() < 3) parse_fail(path, line_no, "expected x y z");
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_number(toks[k], p[k])) parse_fail(path, line_no, "bad number '" + toks[k] + "'");
    }
    points.push_back(p);
  }
  try {
    return PointCloud(std::move(points), viewpoint);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

std::string pose_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : pose_number(v);
}

CloudFormat parse_cloud_format(const std::string& name) {
  if (name == "ply-ascii") return CloudFormat::PlyAscii;
  if (name == "ply-binary-le") return CloudFormat::PlyBinaryLE;
  if (name == "xyz-text") return CloudFormat::XyzText;
  throw Error(ErrorCode::UnsupportedFormat, "unknown cloud format '" + name + "'");
}

const char* to_string(CloudFormat format) {
  switch (format) {
    case CloudFormat::PlyAscii: return "ply-ascii";
    case CloudFormat::PlyBinaryLE: return "ply-binary-le";
    case CloudFormat::XyzText: return "xyz-text";
  }
  return "unknown";
}

CloudFormat detect_cloud_format(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "xyz" || ext == "txt") return CloudFormat::XyzText;
  if (ext != "ply") throw Error(ErrorCode::UnsupportedFormat, "cannot infer cloud format of " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  for (int i = 0; i < 64 && std::getline(in, line); ++i) {
    const auto toks = split_ws(line);
    if (toks.size() >= 2 && toks[0] == "format") {
      if (toks[1] == "ascii") return CloudFormat::PlyAscii;
      if (toks[1] == "binary_little_endian") return CloudFormat::PlyBinaryLE;
      throw Error(ErrorCode::UnsupportedFormat, path + ": PLY format '" + toks[1] + "' is not supported");
    }
  }
  throw Error(ErrorCode::ParseError, path + ": no PLY format line");
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
  const std::string data = read_file(path);
  if (format == CloudFormat::XyzText) return load_xyz(path, data);
  return load_ply(path, data, format);
}

PointCloud load_cloud(const std::string& path) { return load_cloud(path, detect_cloud_format(path)); }

void save_cloud(const PointCloud& pc, const std::string& path, CloudFormat format) {
  const Point3& vp = pc.viewpoint();
  std::string out;
  if (format == CloudFormat::XyzText) {
    out += "# viewpoint " + pose_number(vp.x()) + " " + pose_number(vp.y()) + " " + pose_number(vp.z()) + "\n";
    for (const auto& p : pc.points()) {
      out += pose_number(p.x()) + " " + pose_number(p.y()) + " " + pose_number(p.z()) + "\n";
    }
    write_file(path, out);
    return;
  }
  const bool binary = format == CloudFormat::PlyBinaryLE;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "comment viewpoint " + pose_number(vp.x()) + " " + pose_number(vp.y()) + " " + pose_number(vp.z()) + "\n";
  out += "element vertex " + std::to_string(pc.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\nend_header\n";
  if (binary) {
    static_assert(std::endian::native == std::endian::little, "binary PLY writer assumes a little-endian host");
    const std::size_t header = out.size();
    out.resize(header + pc.size() * 24);
    char* dst = out.data() + header;
    for (const auto& p : pc.points()) {
      std::memcpy(dst, p.data(), 24);
      dst += 24;
    }
  } else {
    for (const auto& p : pc.points()) {
      out += pose_number(p.x()) + " " + pose_number(p.y()) + " " + pose_number(p.z()) + "\n";
    }
  }
  write_file(path, out);
}

RigidTransform parse_pose(const std::string& text) {
  const auto toks = split_ws(text);
  if (toks.size() != 16) {
    throw Error(ErrorCode::ParseError, "pose needs 16 numbers, found " + std::to_string(toks.size()));
  }
  Eigen::Matrix4d m;
  for (int i = 0; i < 16; ++i) {
    if (!parse_number(toks[i], m(i / 4, i % 4))) throw Error(ErrorCode::ParseError, "bad pose entry '" + toks[i] + "'");
  }
  return RigidTransform::from_matrix(m);
}

std::string format_pose(const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  std::string out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out += pose_number(m(r, c)) + (c == 3 ? "\n" : " ");
  }
  return out;
}

RigidTransform load_pose(const std::string& path) {
  const std::string data = read_file(path);
  try {
    return parse_pose(data);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::ParseError, path + ": " + e.what());
    throw;
  }
}

void save_pose(const RigidTransform& t, const std::string& path) { write_file(path, format_pose(t)); }

CorrespondenceSet load_correspondences(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  CorrespondenceSet set;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2 && toks.size() != 3) parse_fail(path, line_no, "expected 'i j [w]'");
    Correspondence c;
    if (!parse_index(toks[0], c.src) || !parse_index(toks[1], c.dst)) parse_fail(path, line_no, "bad index");
    if (toks.size() == 3) {
      double w = 0;
      if (!parse_number(toks[2], w) || !(w >= 0.0 && w <= 1.0)) parse_fail(path, line_no, "weight must lie in [0, 1]");
      c.weight = w;
    }
    try {
      set.add(c);
    } catch (const Error& e) {
      parse_fail(path, line_no, e.what());
    }
  }
  return set;
}

void save_correspondences(const CorrespondenceSet& corr, const std::string& path) {
  std::string out;
  for (const auto& c : corr) {
    out += std::to_string(c.src) + " " + std::to_string(c.dst);
    if (c.weight) out += " " + pose_number(*c.weight);
    out += "\n";
  }
  write_file(path, out);
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::string> out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, line_no, "expected key=value");
    const std::string key = strip(line.substr(0, eq));
    if (key.empty()) parse_fail(path, line_no, "empty key");
    out[key] = strip(line.substr(eq + 1));
  }
  return out;
}

void apply_config(std::map<std::string, std::string>& entries, SvcConfig& cfg) {
  auto take_real = [&](const char* key, double& field) {
    const auto it = entries.find(key);
    if (it == entries.end()) return;
    if (!parse_number(it->second, field)) throw Error(ErrorCode::ParseError, std::string("bad value for ") + key);
    entries.erase(it);
  };
  take_real("tau", cfg.tau);
  take_real("eta1", cfg.eta1);
  take_real("eta2", cfg.eta2);
  take_real("t_threshold", cfg.t_threshold);
  take_real("min_range", cfg.min_range);
  if (const auto it = entries.find("k"); it != entries.end()) {
    if (!parse_index(it->second, cfg.k)) throw Error(ErrorCode::ParseError, "bad value for k");
    entries.erase(it);
  }
}

}  // namespace svc
