#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calibcube/frequency.hpp"
#include "calibcube/geometry.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

// One 3D reference point (source-sensor frame, meters) with its observed
// projection (target-sensor pixels) and a stable label for reporting.
struct Correspondence {
  Point3 point;
  Point2 pixel;
  std::string label;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  CameraIntrinsics camera;
};

// Rigid transform carrying source-sensor coordinates into the target sensor.
struct Extrinsics {
  Pose pose;
  std::string source_sensor;
  std::string target_sensor;
  std::optional<Eigen::Matrix<double, 6, 6>> covariance;  // from LM normal eqs
};

struct ReprojectionStats {
  double mean = 0.0;  // arithmetic mean of per-point pixel residual norms
  double max = 0.0;
  std::vector<std::pair<std::string, double>> per_point;
  int n = 0;
};

// Stacked residuals, two per pair, of the undistorted pinhole model at
// `pose`: pixels are undistorted once, the model error is measured on the
// normalized plane and scaled by the focal lengths so it reads as pixels.
// Optionally fills the analytic Jacobian with respect to a local increment
// (axis-angle composed onto the rotation from the left, then translation).
// Exposed so the gradient can be checked against finite differences.
Eigen::VectorXd pnp_residuals(const CorrespondenceSet& corrs, const Pose& pose,
                              Eigen::MatrixXd* jacobian = nullptr);

// Perspective-n-point: linear initialization (DLT for 6+ points in general
// position, planar homography decomposition for coplanar sets, a bank of
// coarse orientations for 4..5-point general sets), then Levenberg-Marquardt
// on the reprojection residuals. Throws TooFewPoints (< 4 pairs),
// DegenerateConfiguration (collinear points), NoConvergence (LM budget),
// InvariantViolation (duplicate labels).
Extrinsics solve_pnp(const CorrespondenceSet& corrs);

// Euclidean pixel residual per pair under the full (distorting) projection.
// Throws BehindCamera naming the offending label.
ReprojectionStats reprojection_stats(const CorrespondenceSet& corrs,
                                     const Extrinsics& ext);

// Joins LiDAR-derived cube corners with event-side LED keypoints by corner
// index and solves the event camera extrinsics. Labels are E_0..E_6.
std::pair<Extrinsics, ReprojectionStats> calibrate_event_lidar(
    const std::array<Point3, kNumLeds>& corners3d,
    const std::vector<LedKeypoint>& keypoints, const CameraIntrinsics& K);

// Joins LiDAR-derived marker corners with matched 2D detections by global
// corner index (0..59) and solves the RGB camera extrinsics. Labels A_0..A_59.
std::pair<Extrinsics, ReprojectionStats> calibrate_rgb_lidar(
    const std::array<Point3, kNumMarkerCorners>& aruco3d,
    const std::vector<std::pair<int, Point2>>& detections,
    const CameraIntrinsics& K);

// Unweighted mean of the per-calibration mean errors, grouped by kind.
std::map<std::string, double> aggregate_by_type(
    const std::vector<std::pair<std::string, ReprojectionStats>>& entries);

struct SavedCalibration {
  Extrinsics ext;
  ReprojectionStats stats;
  std::string config_digest;
  uint64_t seed = 0;
};

// JSON result file: {source, target, rotation_quaternion_wxyz,
// rotation_matrix_row_major, translation_m, reprojection, config_digest,
// seed}. Identical inputs produce byte-identical files.
void save_extrinsics(const SavedCalibration& calib, const std::string& path);
SavedCalibration load_extrinsics(const std::string& path);

}  // namespace calibcube
