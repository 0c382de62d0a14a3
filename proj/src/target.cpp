#include "calibcube/target.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "calibcube/numfmt.hpp"
#include "calibcube/toml.hpp"

namespace calibcube {

namespace {

// Grid squares carrying a marker on a 3x3 ChArUco face (row, col): the five
// majority-color squares.
constexpr std::array<std::pair<int, int>, kMarkersPerFace> kMarkerSquares = {
    {{0, 0}, {0, 2}, {1, 1}, {2, 0}, {2, 2}}};

double min_frequency_gap(const TargetSpec& spec) {
  std::array<double, kNumLeds> sorted = spec.led_frequencies_hz;
  std::sort(sorted.begin(), sorted.end());
  double gap = sorted.back();
  for (int i = 1; i < kNumLeds; ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
  return gap;
}

}  // namespace

void TargetSpec::validate() const {
  if (!(edge_length > 0.0))
    throw CalibError(Errc::InvalidSpec, "edge_length must be positive");
  std::set<double> unique_freqs;
  for (double f : led_frequencies_hz) {
    if (!(f >= 10.0 && f <= 200.0))
      throw CalibError(Errc::InvalidSpec,
                       "LED frequency " + fmt_double(f) + " outside [10, 200] Hz");
    unique_freqs.insert(f);
  }
  if (unique_freqs.size() != kNumLeds)
    throw CalibError(Errc::InvalidSpec, "LED frequencies must be distinct");

  const double square = edge_length / 3.0;
  if (!(marker_side > 0.0) || marker_side >= square)
    throw CalibError(Errc::InvalidSpec,
                     "marker_side must fit a " + fmt_double(square) +
                         " m grid square with positive margin");

  std::set<int> all_ids;
  for (const auto& face_ids : marker_ids) {
    if (face_ids.size() != kMarkersPerFace)
      throw CalibError(Errc::InvalidSpec, "each face needs exactly 5 marker IDs");
    for (int id : face_ids) {
      if (id < 0) throw CalibError(Errc::InvalidSpec, "negative marker ID");
      all_ids.insert(id);
    }
  }
  if (all_ids.size() != 3 * kMarkersPerFace)
    throw CalibError(Errc::InvalidSpec, "marker IDs must be unique across faces");
}

std::pair<int, int> TargetSpec::find_marker(int id) const {
  for (int f = 0; f < 3; ++f) {
    for (int s = 0; s < kMarkersPerFace; ++s)
      if (marker_ids[f][s] == id) return {f, s};
  }
  return {-1, -1};
}

std::array<Point2, 4> marker_corners_on_face(const TargetSpec& spec, int slot) {
  const double square = spec.edge_length / 3.0;
  const double margin = 0.5 * (square - spec.marker_side);
  const auto [row, col] = kMarkerSquares[slot];
  const double u0 = col * square;
  const double v0 = row * square;
  // Canonical order: top-left of the marker frame, then clockwise, with v
  // playing the board-picture "down" direction.
  return {Point2(u0 + margin, v0 + margin),
          Point2(u0 + square - margin, v0 + margin),
          Point2(u0 + square - margin, v0 + square - margin),
          Point2(u0 + margin, v0 + square - margin)};
}

TargetGeometry build_geometry(const TargetSpec& spec) {
  spec.validate();
  const double L = spec.edge_length;

  TargetGeometry geo;
  geo.edge_length = L;
  geo.corners = {Point3(0, 0, 0), Point3(L, 0, 0), Point3(0, L, 0),
                 Point3(0, 0, L), Point3(L, L, 0), Point3(0, L, L),
                 Point3(L, 0, L)};

  // A printed picture with in-plane axes (u right, v down) reads in canonical
  // non-mirrored orientation exactly when u x v points into the page, away
  // from the viewer. Sensors observe each face from its negative-axis side,
  // so axis_u x axis_v must equal the inward `normal` on every face.
  geo.face_frames = {
      FaceFrame{Point3::Zero(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ(),
                Eigen::Vector3d::UnitX()},
      FaceFrame{Point3::Zero(), Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitX(),
                Eigen::Vector3d::UnitY()},
      FaceFrame{Point3::Zero(), Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                Eigen::Vector3d::UnitZ()}};

  int index = 0;
  for (int f = 0; f < 3; ++f) {
    const FaceFrame& frame = geo.face_frames[f];
    for (int s = 0; s < kMarkersPerFace; ++s) {
      for (const Point2& uv : marker_corners_on_face(spec, s)) {
        geo.aruco_corners[index++] =
            frame.origin + uv.x() * frame.axis_u + uv.y() * frame.axis_v;
      }
    }
  }
  return geo;
}

int corner_for_frequency(const TargetSpec& spec, double f_hz, double tol_hz) {
  int match = -1;
  for (int i = 0; i < kNumLeds; ++i) {
    if (std::abs(spec.led_frequencies_hz[i] - f_hz) <= tol_hz) {
      if (match >= 0)
        throw CalibError(Errc::AmbiguousMatch,
                         "frequency " + fmt_double(f_hz) + " Hz matches corners " +
                             std::to_string(match) + " and " + std::to_string(i));
      match = i;
    }
  }
  if (match < 0)
    throw CalibError(Errc::NoMatch,
                     "no LED within " + fmt_double(tol_hz) + " Hz of " +
                         fmt_double(f_hz) + " Hz");
  return match;
}

double frequency_tolerance(const TargetSpec& spec, double nominal_hz) {
  const double tol = std::max(2.0, 0.05 * nominal_hz);
  const double gap = min_frequency_gap(spec);
  if (!(tol < 0.5 * gap))
    throw CalibError(Errc::InvalidSpec,
                     "frequency tolerance " + fmt_double(tol) +
                         " Hz exceeds half the minimum LED gap " + fmt_double(gap));
  return tol;
}

TargetSpec target_from_toml(const toml::Value& root) {
  TargetSpec spec;
  spec.edge_length = root.get_double("edge_length_m");
  std::vector<double> freqs = root.get_double_array("led_frequencies_hz");
  if (freqs.size() != kNumLeds)
    throw CalibError(Errc::ConfigError, "led_frequencies_hz must have 7 entries");
  std::copy(freqs.begin(), freqs.end(), spec.led_frequencies_hz.begin());
  spec.marker_side = root.get_double("marker_side_m");
  spec.dictionary = root.get_string_or("dictionary", spec.dictionary);

  const toml::Value& ids = root.at("marker_ids");
  const char* face_keys[3] = {"face_x", "face_y", "face_z"};
  for (int f = 0; f < 3; ++f) {
    spec.marker_ids[f].clear();
    for (const auto& v : ids.at(face_keys[f]).as_array(face_keys[f]))
      spec.marker_ids[f].push_back(static_cast<int>(v.as_int(face_keys[f])));
  }
  spec.validate();
  return spec;
}

TargetSpec load_target(const std::string& path) {
  return target_from_toml(toml::parse_file(path));
}

void write_target_toml(std::ostream& out, const TargetSpec& spec,
                       const std::string& table) {
  if (!table.empty()) out << "[" << table << "]\n";
  out << "edge_length_m = " << fmt_double(spec.edge_length) << "\n";
  out << "led_frequencies_hz = [";
  for (int i = 0; i < kNumLeds; ++i)
    out << (i ? ", " : "") << fmt_double(spec.led_frequencies_hz[i]);
  out << "]\n";
  out << "marker_side_m = " << fmt_double(spec.marker_side) << "\n";
  out << "dictionary = \"" << spec.dictionary << "\"\n\n";
  out << "[" << (table.empty() ? "" : table + ".") << "marker_ids]\n";
  const char* face_keys[3] = {"face_x", "face_y", "face_z"};
  for (int f = 0; f < 3; ++f) {
    out << face_keys[f] << " = [";
    for (size_t i = 0; i < spec.marker_ids[f].size(); ++i)
      out << (i ? ", " : "") << spec.marker_ids[f][i];
    out << "]\n";
  }
}

void save_target(const TargetSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write '" + path + "'");
  write_target_toml(out, spec, "");
  if (!out) throw CalibError(Errc::IoError, "failed writing '" + path + "'");
}

}  // namespace calibcube
