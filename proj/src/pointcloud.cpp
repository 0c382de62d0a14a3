#include "calibcube/pointcloud.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "calibcube/error.hpp"
#include "calibcube/numfmt.hpp"

namespace calibcube {
namespace {

std::string extension_of(const std::string& path) {
  size_t dot = path.find_last_of('.');
  size_t sep = path.find_last_of('/');
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep)) return "";
  return path.substr(dot);
}

[[noreturn]] void parse_fail(const std::string& path, size_t line, const std::string& what) {
  throw CalibError(Errc::ParseError, path + ":" + std::to_string(line) + ": " + what);
}

double parse_double_field(const char* begin, const char* end, const std::string& path,
                          size_t line) {
  double v{};
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) parse_fail(path, line, "bad numeric field");
  return v;
}

void check_finite(const Point3& p, const std::string& path, size_t line) {
  if (!p.allFinite()) parse_fail(path, line, "non-finite coordinate");
}

struct PlyHeader {
  bool binary = false;
  size_t vertex_count = 0;
  // Property order within a vertex record; -1 = absent.
  int ix = -1, iy = -1, iz = -1, ii = -1;
  int n_props = 0;
  size_t body_offset = 0;
};

PlyHeader parse_ply_header(const std::string& bytes, const std::string& path) {
  PlyHeader h;
  size_t pos = 0;
  size_t lineno = 0;
  bool in_vertex = false;
  bool ended = false;
  while (pos < bytes.size()) {
    size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) break;
    std::string line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;
    ++lineno;
    if (lineno == 1 && line != "ply") parse_fail(path, 1, "not a PLY file");
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii")
        h.binary = false;
      else if (fmt == "binary_little_endian")
        h.binary = true;
      else
        parse_fail(path, lineno, "unsupported PLY format " + fmt);
    } else if (word == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      in_vertex = (name == "vertex");
      if (in_vertex) h.vertex_count = count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      if (type != "float" && type != "float32")
        parse_fail(path, lineno, "vertex properties must be 32-bit floats");
      if (name == "x") h.ix = h.n_props;
      else if (name == "y") h.iy = h.n_props;
      else if (name == "z") h.iz = h.n_props;
      else if (name == "intensity") h.ii = h.n_props;
      ++h.n_props;
    } else if (word == "end_header") {
      ended = true;
      h.body_offset = pos;
      break;
    }
  }
  if (!ended) parse_fail(path, lineno, "missing end_header");
  if (h.ix < 0 || h.iy < 0 || h.iz < 0)
    parse_fail(path, lineno, "vertex element lacks x/y/z properties");
  return h;
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  PlyHeader h = parse_ply_header(bytes, path);

  PointCloud cloud;
  cloud.points.reserve(h.vertex_count);
  if (h.ii >= 0) cloud.intensity.reserve(h.vertex_count);

  if (h.binary) {
    size_t record = 4 * size_t(h.n_props);
    if (bytes.size() - h.body_offset < record * h.vertex_count)
      throw CalibError(Errc::ParseError, path + ": truncated binary PLY body");
    const char* p = bytes.data() + h.body_offset;
    for (size_t i = 0; i < h.vertex_count; ++i, p += record) {
      float f[4];
      auto fetch = [&](int idx) {
        float v;
        std::memcpy(&v, p + 4 * idx, 4);
        return v;
      };
      f[0] = fetch(h.ix);
      f[1] = fetch(h.iy);
      f[2] = fetch(h.iz);
      Point3 pt(f[0], f[1], f[2]);
      check_finite(pt, path, i + 1);
      cloud.points.push_back(pt);
      if (h.ii >= 0) cloud.intensity.push_back(fetch(h.ii));
    }
  } else {
    size_t pos = h.body_offset;
    size_t lineno = 0;
    for (size_t i = 0; i < h.vertex_count; ++i) {
      size_t eol = bytes.find('\n', pos);
      std::string line = bytes.substr(pos, eol == std::string::npos
                                               ? std::string::npos
                                               : eol - pos);
      if (eol == std::string::npos && line.empty())
        parse_fail(path, lineno, "truncated ascii PLY body");
      pos = eol == std::string::npos ? bytes.size() : eol + 1;
      ++lineno;
      std::istringstream ss(line);
      std::vector<double> fields;
      double v;
      while (ss >> v) fields.push_back(v);
      if (int(fields.size()) < h.n_props) parse_fail(path, lineno, "short vertex row");
      Point3 pt(fields[size_t(h.ix)], fields[size_t(h.iy)], fields[size_t(h.iz)]);
      check_finite(pt, path, lineno);
      cloud.points.push_back(pt);
      if (h.ii >= 0) cloud.intensity.push_back(float(fields[size_t(h.ii)]));
    }
  }
  return cloud;
}

PointCloud read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_intensity;
  if (line == "x,y,z")
    with_intensity = false;
  else if (line == "x,y,z,intensity")
    with_intensity = true;
  else
    parse_fail(path, 1, "expected header x,y,z[,intensity]");

  PointCloud cloud;
  size_t lineno = 1;
  const size_t n_fields = with_intensity ? 4 : 3;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    double f[4] = {0, 0, 0, 0};
    for (size_t k = 0; k < n_fields; ++k) {
      const char* comma =
          static_cast<const char*>(std::memchr(p, ',', size_t(end - p)));
      const char* stop = (k + 1 < n_fields) ? comma : end;
      if ((k + 1 < n_fields && !comma) || (k + 1 == n_fields && comma))
        parse_fail(path, lineno, "wrong field count");
      f[k] = parse_double_field(p, stop, path, lineno);
      p = stop + 1;
    }
    Point3 pt(f[0], f[1], f[2]);
    check_finite(pt, path, lineno);
    cloud.points.push_back(pt);
    if (with_intensity) cloud.intensity.push_back(float(f[3]));
  }
  return cloud;
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
  std::string ext = extension_of(path);
  if (ext == ".ply") return read_ply(path);
  if (ext == ".csv") return read_csv(path);
  throw CalibError(Errc::ParseError, path + ": unsupported cloud extension '" + ext + "'");
}

void write_cloud(const PointCloud& cloud, const std::string& path, bool binary_ply) {
  if (cloud.has_intensity() && cloud.intensity.size() != cloud.points.size())
    throw CalibError(Errc::InvariantViolation, "intensity size mismatch");
  std::string ext = extension_of(path);
  if (ext == ".ply") {
    std::ostringstream out;
    out << "ply\nformat " << (binary_ply ? "binary_little_endian" : "ascii")
        << " 1.0\nelement vertex " << cloud.points.size()
        << "\nproperty float x\nproperty float y\nproperty float z\n";
    if (cloud.has_intensity()) out << "property float intensity\n";
    out << "end_header\n";
    if (binary_ply) {
      for (size_t i = 0; i < cloud.points.size(); ++i) {
        float f[4] = {float(cloud.points[i].x()), float(cloud.points[i].y()),
                      float(cloud.points[i].z()),
                      cloud.has_intensity() ? cloud.intensity[i] : 0.0f};
        out.write(reinterpret_cast<const char*>(f), cloud.has_intensity() ? 16 : 12);
      }
    } else {
      for (size_t i = 0; i < cloud.points.size(); ++i) {
        out << fmt_double_fixed(cloud.points[i].x(), 6) << ' '
            << fmt_double_fixed(cloud.points[i].y(), 6) << ' '
            << fmt_double_fixed(cloud.points[i].z(), 6);
        if (cloud.has_intensity()) out << ' ' << fmt_double_fixed(double(cloud.intensity[i]), 6);
        out << '\n';
      }
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw CalibError(Errc::IoError, "cannot write " + path);
    file << out.str();
  } else if (ext == ".csv") {
    std::ostringstream out;
    out << (cloud.has_intensity() ? "x,y,z,intensity\n" : "x,y,z\n");
    for (size_t i = 0; i < cloud.points.size(); ++i) {
      out << fmt_double(cloud.points[i].x()) << ',' << fmt_double(cloud.points[i].y())
          << ',' << fmt_double(cloud.points[i].z());
      if (cloud.has_intensity()) out << ',' << fmt_double(double(cloud.intensity[i]));
      out << '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw CalibError(Errc::IoError, "cannot write " + path);
    file << out.str();
  } else {
    throw CalibError(Errc::IoError, path + ": unsupported cloud extension '" + ext + "'");
  }
}

PointCloud crop_cloud(const PointCloud& cloud, const RoiBox& roi) {
  for (int k = 0; k < 3; ++k)
    if (!(roi.min[k] < roi.max[k]))
      throw CalibError(Errc::ConfigError, "ROI min must be below max on every axis");
  PointCloud out;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    bool inside = true;
    for (int k = 0; k < 3; ++k)
      inside = inside && roi.min[k] < p[k] && p[k] < roi.max[k];
    if (!inside) continue;
    out.points.push_back(p);
    if (cloud.has_intensity()) out.intensity.push_back(cloud.intensity[i]);
  }
  if (out.points.empty())
    throw CalibError(Errc::EmptyAfterCrop, "no points inside the ROI");
  return out;
}

}  // namespace calibcube
