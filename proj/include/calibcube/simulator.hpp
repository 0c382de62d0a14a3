#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "calibcube/aruco.hpp"
#include "calibcube/events.hpp"
#include "calibcube/geometry.hpp"
#include "calibcube/image.hpp"
#include "calibcube/pointcloud.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

// DVS response to a blinking LED: every pixel within footprint_radius of the
// projected LED center fires one event per log-intensity threshold crossing.
struct LedRenderModel {
  double footprint_radius = 4.0;  // px
  double contrast_threshold = 0.3;
  double on_level = 1.0;
  double off_level = 0.0;

  // on_level - off_level must exceed contrast_threshold, radius positive.
  void validate() const;
};

// Complete synthetic rig: the target placed in the LiDAR frame and the two
// cameras given by their ground-truth extrinsics from that frame.
struct SceneConfig {
  TargetSpec target;
  Pose gt_pose_target_to_lidar;
  Pose gt_pose_lidar_to_event;
  Pose gt_pose_lidar_to_rgb;
  CameraIntrinsics event_camera;
  CameraIntrinsics rgb_camera;
  LedRenderModel led;
  double duration_s = 1.0;
  double lidar_noise_sigma = 0.0;       // m
  double lidar_outlier_fraction = 0.0;  // of the face-sample count
  double pixel_noise_sigma = 0.0;       // px, perturbs the gt corner list only
  double event_jitter_sigma_us = 0.0;
  double noise_event_rate = 0.0;  // background events per second
  int points_per_face = 2000;
  uint64_t seed = 0;

  void validate() const;
};

// A rig where all LEDs and marker corners project comfortably inside both
// frames: cube 1.6 m in front of the LiDAR, top face up, corner E0 toward
// the sensors, cameras placed near the LiDAR and aimed at the cube center.
SceneConfig default_scene();

SceneConfig load_scene(const std::string& path);
void save_scene(const SceneConfig& config, const std::string& path);

// Events from all seven LEDs (50% duty square waves, per-LED random phase,
// one event per threshold crossing per footprint pixel) plus Poisson
// background noise, sorted by event_order. Gaussian jitter on timestamps,
// clamped to [0, duration]. Throws LedOutOfFrame when an LED center
// projects outside the frame.
std::vector<Event> simulate_events(const SceneConfig& config,
                                   const LedRenderModel& led);

// Uniform samples on the three visible faces in the LiDAR frame with
// isotropic Gaussian noise, followed by round(outlier_fraction * n_samples)
// uniform outliers in the face points' bounding box scaled 2x about its
// center. Face points come first (face X, Y, Z blocks), outliers last.
PointCloud simulate_cloud(const SceneConfig& config);

// Nearest-neighbor rasterization of the fifteen markers on a white
// background, plus the exact projected corner list (15 markers x 4 corners,
// canonical order, sorted by id). pixel_noise_sigma perturbs the returned
// list only; the image is always noise-free. Throws MarkerOutOfFrame when a
// corner projects outside the frame.
std::pair<GrayImage, std::vector<MarkerDetection>> simulate_rgb(
    const SceneConfig& config);

struct SceneManifest {
  std::map<std::string, std::string> file_digests;  // name -> fnv1a64 hex
  std::string config_digest;
  uint64_t seed = 0;
};

// Writes events.csv, cloud.ply, rgb.pgm, detections.json, groundtruth.json,
// scene.toml, and manifest.json into `dir` (created if missing). Returns the
// manifest it wrote.
SceneManifest write_scene(const SceneConfig& config, const std::string& dir);

}  // namespace calibcube
