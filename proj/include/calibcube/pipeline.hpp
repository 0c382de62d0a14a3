#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calibcube/frequency.hpp"
#include "calibcube/geometry.hpp"
#include "calibcube/image.hpp"
#include "calibcube/lidar_detector.hpp"
#include "calibcube/pnp.hpp"
#include "calibcube/pointcloud.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

// One calibration run described by file paths plus the tuning knobs.
//
// TOML schema: top-level `seed`, `out_dir`; [inputs] with `events`, `cloud`,
// `target`, `event_intrinsics`, `rgb_intrinsics`, and exactly one of `image`
// or `detections`; optional [frequency], [ransac] (its RNG stream comes from
// the top-level seed), and [roi] with `min_m` / `max_m`. Relative input
// paths are resolved against the config file's directory at load time.
struct PipelineConfig {
  std::string events_path;
  std::string cloud_path;
  std::string image_path;       // exactly one of image_path/detections_path
  std::string detections_path;
  std::string event_intrinsics_path;
  std::string rgb_intrinsics_path;
  std::string target_path;
  std::string out_dir = "out";
  FrequencyConfig frequency;
  RansacParams ransac;
  std::optional<RoiBox> roi;
  uint64_t seed = 0;
  // fnv1a64 hex of the canonical serialization, so reformatting the file
  // does not change the digest but any effective change does.
  std::string config_digest;

  // Shape checks only; whether the referenced files exist is checked when
  // the run starts.
  void validate() const;
};

PipelineConfig load_pipeline(const std::string& path);
std::string pipeline_toml_string(const PipelineConfig& config);
void save_pipeline(const PipelineConfig& config, const std::string& path);

// Per-branch outcomes. Diagnostics are meaningful only when ok.
struct EventBranch {
  bool ok = false;
  std::string error;
  size_t selected_map = 0;
  BoundingBox bbox;
  std::vector<LedKeypoint> keypoints;
};

struct LidarBranch {
  bool ok = false;
  std::string error;
  std::array<Plane, 3> planes;         // face order
  std::array<int, 3> inlier_counts;    // face order
  std::array<Point3, kNumLeds> corners;
  std::array<Point3, kNumMarkerCorners> aruco_corners;
};

struct RgbBranch {
  bool ok = false;
  std::string error;
  std::vector<int> marker_ids;  // sorted
  std::vector<std::pair<int, Point2>> matches;
};

struct SolveOutcome {
  bool ok = false;
  std::string error;
  Extrinsics ext;
  ReprojectionStats stats;
};

struct PipelineResult {
  EventBranch event;
  LidarBranch lidar;
  RgbBranch rgb;
  SolveOutcome event_lidar;  // lidar -> event
  SolveOutcome rgb_lidar;    // lidar -> rgb
  bool all_ok() const {
    return event.ok && lidar.ok && rgb.ok && event_lidar.ok && rgb_lidar.ok;
  }
  // "branch: message" per failed stage, report order.
  std::vector<std::string> failures() const;
};

// The three feature branches run concurrently on the same inputs; each
// failure is recorded in place of its diagnostics, never thrown. A solve
// runs when both branches it joins succeeded. Throws only for config-level
// problems (unreadable target/intrinsics, missing input files).
PipelineResult run_calibration(const PipelineConfig& config);

// Extrinsics JSON per successful solve, report.json with the per-branch
// diagnostics, and one overlay SVG per successful solve, all in out_dir.
// File names are fixed: extrinsics_lidar_to_event.json,
// extrinsics_lidar_to_rgb.json, report.json, overlay_lidar_to_event.svg,
// overlay_lidar_to_rgb.svg.
void write_calibration_outputs(const PipelineConfig& config,
                               const PipelineResult& result);

// Event activity accumulated over the first 33.333 ms of the stream:
// mid-gray background, each event shifts its pixel by +/-24 per polarity.
GrayImage accumulate_event_frame(const std::vector<Event>& events, int width,
                                 int height);

// Cloud points projected through `cloud_to_camera`, colored by camera-frame
// depth (near red, far blue), drawn over the background raster. Exactly one
// raster layer and one point group; digest and seed ride in <desc>.
void write_overlay_svg(const GrayImage& background, const PointCloud& cloud,
                       const Pose& cloud_to_camera, const CameraIntrinsics& K,
                       const std::string& config_digest, uint64_t seed,
                       const std::string& path);

struct EvaluationResult {
  std::string source_sensor;
  std::string target_sensor;
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
  // Mean reprojection error of the ground-truth features under the
  // estimated pose, under the true pose, and their difference.
  double e_mean_estimate_px = 0.0;
  double e_mean_groundtruth_px = 0.0;
  double e_mean_delta_px = 0.0;
};

// Compares a saved calibration against a scene ground-truth file (the
// groundtruth.json a simulated scene ships). The calibration's sensor pair
// selects the reference pose, feature set, and intrinsics; an unknown pair
// or missing keys throw ConfigError.
EvaluationResult evaluate_against_groundtruth(const SavedCalibration& calib,
                                              const std::string& groundtruth_path);

// CLI entry points. Exit codes: 0 ok, 2 config/schema error, 3 I/O error,
// 4 pipeline-branch failure. Errors go to stderr.
int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override = std::nullopt);
int cmd_calibrate(const std::string& config_path,
                  const std::string& out_dir_override = "",
                  std::optional<uint64_t> seed_override = std::nullopt);
int cmd_evaluate(const std::string& calib_path, const std::string& groundtruth_path,
                 const std::string& out_path);
int cmd_report(const std::string& calib_path, const std::string& cloud_path,
               const std::string& media_path, const std::string& intrinsics_path,
               const std::string& out_svg);

}  // namespace calibcube
