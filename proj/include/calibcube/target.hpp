#ifndef CALIBCUBE_TARGET_HPP
#define CALIBCUBE_TARGET_HPP

#include <array>
#include <string>
#include <vector>

#include "calibcube/geometry.hpp"

namespace calibcube {

/// The three cube faces visible to the sensors, named by the canonical
/// target-frame plane they lie on (x = 0, y = 0, z = 0).
enum class Face : int { X = 0, Y = 1, Z = 2 };

constexpr int kNumLeds = 7;
constexpr int kMarkersPerFace = 5;
constexpr int kNumMarkerCorners = 60;  // 5 markers x 3 faces x 4 corners

/// Physical description of the calibration cube: one LED per visible corner,
/// one 3x3 ChArUco-style board per visible face (markers on the 5 majority
/// squares; the chessboard corners are not used as features).
struct TargetSpec {
  double edge_length = 0.5;  // meters
  std::array<double, kNumLeds> led_frequencies_hz = {25.0,  50.0,  75.0, 100.0,
                                                     125.0, 150.0, 175.0};
  double marker_side = 0.12;  // meters
  std::array<std::vector<int>, 3> marker_ids = {
      std::vector<int>{0, 1, 2, 3, 4},
      std::vector<int>{5, 6, 7, 8, 9},
      std::vector<int>{10, 11, 12, 13, 14}};
  std::string dictionary = "calib4x4_50";

  /// Throws InvalidSpec when any invariant fails (7 distinct frequencies in
  /// [10, 200] Hz, 5 unique marker IDs per face, positive dimensions).
  void validate() const;

  int markers_per_face() const { return kMarkersPerFace; }

  /// Index of the face and slot carrying dictionary ID `id`, or (-1, -1).
  std::pair<int, int> find_marker(int id) const;
};

/// In-plane coordinate frame of one face: 3D point = origin + u * axis_u +
/// v * axis_v with (u, v) in [0, edge]^2; `normal` is the face plane normal.
struct FaceFrame {
  Point3 origin;
  Eigen::Vector3d axis_u;
  Eigen::Vector3d axis_v;
  Eigen::Vector3d normal;
};

/// All target-frame 3D reference points, derived from a TargetSpec.
/// Canonical frame: E_0 (the corner shared by the three visible faces) at the
/// origin, cube body in [0, L]^3, face normals along +x, +y, +z.
struct TargetGeometry {
  std::array<Point3, kNumLeds> corners;               // E_0 .. E_6
  std::array<Point3, kNumMarkerCorners> aruco_corners;  // A_0 .. A_59
  std::array<FaceFrame, 3> face_frames;
  double edge_length = 0.0;
};

/// Corner numbering: E_0 origin; E_1..E_3 the single-axis vertices
/// (L,0,0), (0,L,0), (0,0,L); E_4..E_6 the two-axis vertices
/// (L,L,0), (0,L,L), (L,0,L). Marker corner A_{f*20 + s*4 + k} is corner k
/// (top-left, then clockwise) of slot s on face f.
TargetGeometry build_geometry(const TargetSpec& spec);

/// Face-local marker corner positions for (face, slot): 4 points (u, v),
/// canonical order. Shared by geometry derivation and the simulator.
std::array<Point2, 4> marker_corners_on_face(const TargetSpec& spec, int slot);

/// Resolve a measured blink frequency to its corner index.
/// Throws NoMatch when no nominal frequency is within `tol_hz`, and
/// AmbiguousMatch when two are (possible only if the precondition
/// tol < half the minimum inter-LED gap was violated).
int corner_for_frequency(const TargetSpec& spec, double f_hz, double tol_hz);

/// Frequency-match tolerance used by the event branch:
/// max(2 Hz, 5% of nominal), validated against the minimum inter-LED gap.
double frequency_tolerance(const TargetSpec& spec, double nominal_hz);

TargetSpec load_target(const std::string& path);
void save_target(const TargetSpec& spec, const std::string& path);

namespace toml {
class Value;
}
/// Same schema as load_target, read from an already-parsed table.
TargetSpec target_from_toml(const toml::Value& root);
/// Emit the load_target schema; a nonempty `table` nests everything under
/// [table] / [table.marker_ids].
void write_target_toml(std::ostream& out, const TargetSpec& spec,
                       const std::string& table);

}  // namespace calibcube

#endif  // CALIBCUBE_TARGET_HPP
