#include "calibcube/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "calibcube/digest.hpp"
#include "calibcube/numfmt.hpp"
#include "calibcube/rng.hpp"
#include "calibcube/toml.hpp"

namespace calibcube {

namespace {

// Camera orientation with z through the aim point and image rows kept level
// against world up (+z). Returns the world-to-camera pose.
Pose look_at(const Point3& position, const Point3& aim) {
  Point3 forward = aim - position;
  if (forward.norm() < 1e-12)
    throw CalibError(Errc::InvariantViolation, "look_at: aim equals position");
  forward.normalize();
  Point3 right = forward.cross(Point3::UnitZ());
  if (right.norm() < 1e-9)
    throw CalibError(Errc::InvariantViolation,
                     "look_at: view direction parallel to world up");
  right.normalize();
  Point3 down = forward.cross(right);
  Eigen::Matrix3d cam_to_world;
  cam_to_world.col(0) = right;
  cam_to_world.col(1) = down;
  cam_to_world.col(2) = forward;
  Eigen::Matrix3d R = cam_to_world.transpose();
  return Pose(Eigen::Quaterniond(R), -(R * position));
}

Pose pose_from_toml(const toml::Value& table, const std::string& name) {
  std::vector<double> q;
  for (const auto& v : table.at("rotation_wxyz").as_array(name))
    q.push_back(v.as_double(name));
  std::vector<double> t;
  for (const auto& v : table.at("translation_m").as_array(name))
    t.push_back(v.as_double(name));
  if (q.size() != 4 || t.size() != 3)
    throw CalibError(Errc::ConfigError,
                     name + ": rotation_wxyz needs 4 entries, translation_m 3");
  Eigen::Quaterniond rot(q[0], q[1], q[2], q[3]);
  if (std::abs(rot.norm() - 1.0) > 1e-6)
    throw CalibError(Errc::ConfigError, name + ": quaternion is not unit length");
  return Pose(rot, Point3(t[0], t[1], t[2]));
}

void write_pose_toml(std::ostream& out, const std::string& table, const Pose& p) {
  out << "[" << table << "]\n";
  out << "rotation_wxyz = [" << fmt_double(p.rotation.w()) << ", "
      << fmt_double(p.rotation.x()) << ", " << fmt_double(p.rotation.y()) << ", "
      << fmt_double(p.rotation.z()) << "]\n";
  out << "translation_m = [" << fmt_double(p.translation.x()) << ", "
      << fmt_double(p.translation.y()) << ", " << fmt_double(p.translation.z())
      << "]\n";
}

struct FootprintPixel {
  int x;
  int y;
};

std::vector<FootprintPixel> footprint_pixels(const Point2& center, double radius,
                                             int width, int height) {
  std::vector<FootprintPixel> out;
  const int x0 = std::max(0, int(std::ceil(center.x() - radius)));
  const int x1 = std::min(width - 1, int(std::floor(center.x() + radius)));
  const int y0 = std::max(0, int(std::ceil(center.y() - radius)));
  const int y1 = std::min(height - 1, int(std::floor(center.y() + radius)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - center.x();
      const double dy = y - center.y();
      if (dx * dx + dy * dy <= r2) out.push_back({x, y});
    }
  }
  return out;
}

nlohmann::json pose_to_json(const Pose& p) {
  nlohmann::json j;
  j["rotation_quaternion_wxyz"] = {p.rotation.w(), p.rotation.x(), p.rotation.y(),
                                   p.rotation.z()};
  j["translation_m"] = {p.translation.x(), p.translation.y(), p.translation.z()};
  return j;
}

nlohmann::json intrinsics_to_json(const CameraIntrinsics& K) {
  nlohmann::json j;
  j["fx"] = K.fx;
  j["fy"] = K.fy;
  j["cx"] = K.cx;
  j["cy"] = K.cy;
  j["dist"] = K.dist;
  j["width"] = K.width;
  j["height"] = K.height;
  return j;
}

uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot read back '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.str());
}

}  // namespace

void LedRenderModel::validate() const {
  if (!(footprint_radius > 0.0))
    throw CalibError(Errc::ConfigError, "footprint_radius must be positive");
  if (!(contrast_threshold > 0.0))
    throw CalibError(Errc::ConfigError, "contrast_threshold must be positive");
  if (!(on_level - off_level > contrast_threshold))
    throw CalibError(Errc::ConfigError,
                     "on_level - off_level must exceed contrast_threshold");
}

void SceneConfig::validate() const {
  target.validate();
  event_camera.validate();
  rgb_camera.validate();
  led.validate();
  if (!(duration_s > 0.0))
    throw CalibError(Errc::ConfigError, "duration_s must be positive");
  if (!(lidar_outlier_fraction >= 0.0 && lidar_outlier_fraction <= 1.0))
    throw CalibError(Errc::ConfigError, "lidar_outlier_fraction outside [0, 1]");
  if (lidar_noise_sigma < 0.0 || pixel_noise_sigma < 0.0 ||
      event_jitter_sigma_us < 0.0)
    throw CalibError(Errc::ConfigError, "noise sigmas must be >= 0");
  if (noise_event_rate < 0.0)
    throw CalibError(Errc::ConfigError, "noise_event_rate must be >= 0");
  // Downstream plane RANSAC defaults need min_inliers=100 per face.
  if (points_per_face < 100)
    throw CalibError(Errc::ConfigError, "points_per_face must be >= 100");
}

SceneConfig default_scene() {
  SceneConfig cfg;

  // Corner E0 toward the sensors, 1.6 m ahead of the LiDAR (x forward,
  // y left, z up), then pitched 35 degrees toward them so the top face is
  // readable by the cameras while its normal stays the most upward of the
  // three (the LiDAR face-labeling convention).
  const double s = std::sqrt(0.5);
  Eigen::Matrix3d R;
  R << s, s, 0.0, s, -s, 0.0, 0.0, 0.0, -1.0;
  const Eigen::Matrix3d tilt =
      Eigen::AngleAxisd(-35.0 * M_PI / 180.0, Eigen::Vector3d::UnitY())
          .toRotationMatrix();
  cfg.gt_pose_target_to_lidar =
      Pose(Eigen::Quaterniond(tilt * R), Point3(1.6, 0.1, -0.25));

  const double half = cfg.target.edge_length / 2.0;
  const Point3 cube_center =
      cfg.gt_pose_target_to_lidar * Point3(half, half, half);

  cfg.event_camera.fx = 650.0;
  cfg.event_camera.fy = 650.0;
  cfg.event_camera.cx = 320.0;
  cfg.event_camera.cy = 240.0;
  cfg.event_camera.width = 640;
  cfg.event_camera.height = 480;
  cfg.gt_pose_lidar_to_event = look_at(Point3(0.0, -0.1, 0.05), cube_center);

  cfg.rgb_camera.fx = 900.0;
  cfg.rgb_camera.fy = 900.0;
  cfg.rgb_camera.cx = 640.0;
  cfg.rgb_camera.cy = 480.0;
  cfg.rgb_camera.width = 1280;
  cfg.rgb_camera.height = 960;
  cfg.rgb_camera.dist = {-0.05, 0.01, 0.0, 0.0, 0.0};
  cfg.gt_pose_lidar_to_rgb = look_at(Point3(0.0, 0.15, -0.05), cube_center);

  return cfg;
}

std::vector<Event> simulate_events(const SceneConfig& config,
                                   const LedRenderModel& led) {
  config.validate();
  led.validate();
  const TargetGeometry geo = build_geometry(config.target);
  const Pose target_to_event =
      compose(config.gt_pose_lidar_to_event, config.gt_pose_target_to_lidar);
  const CameraIntrinsics& K = config.event_camera;
  const int64_t duration_us = std::llround(config.duration_s * 1e6);

  std::array<Point2, kNumLeds> centers;
  for (int i = 0; i < kNumLeds; ++i) {
    centers[size_t(i)] = project(geo.corners[size_t(i)], target_to_event, K);
    const Point2& c = centers[size_t(i)];
    if (!(c.x() >= 0.0 && c.x() < K.width && c.y() >= 0.0 && c.y() < K.height))
      throw CalibError(Errc::LedOutOfFrame,
                       "LED " + std::to_string(i) + " projects to (" +
                           fmt_double(c.x()) + ", " + fmt_double(c.y()) +
                           "), outside the event frame");
  }

  Rng phase_rng = Rng::substream(config.seed, "event-phase");
  std::array<double, kNumLeds> phase;
  for (double& p : phase) p = phase_rng.uniform();

  Rng jitter_rng = Rng::substream(config.seed, "event-jitter");
  std::vector<Event> events;
  for (int i = 0; i < kNumLeds; ++i) {
    const double f = config.target.led_frequencies_hz[size_t(i)];
    const auto pixels =
        footprint_pixels(centers[size_t(i)], led.footprint_radius, K.width, K.height);
    // Threshold crossings of the 50% duty square wave at f*t + phase = k/2:
    // even k switches on (+1), odd k switches off (-1).
    const int64_t k_min = int64_t(std::floor(2.0 * phase[size_t(i)])) + 1;
    const int64_t k_max =
        int64_t(std::floor(2.0 * (f * config.duration_s + phase[size_t(i)])));
    for (const FootprintPixel& px : pixels) {
      for (int64_t k = k_min; k <= k_max; ++k) {
        double t_us = (0.5 * double(k) - phase[size_t(i)]) / f * 1e6;
        if (config.event_jitter_sigma_us > 0.0)
          t_us += jitter_rng.normal(0.0, config.event_jitter_sigma_us);
        Event ev;
        ev.x = px.x;
        ev.y = px.y;
        ev.t_us = std::clamp<int64_t>(std::llround(t_us), 0, duration_us);
        ev.polarity = (k % 2 == 0) ? int8_t(1) : int8_t(-1);
        events.push_back(ev);
      }
    }
  }

  if (config.noise_event_rate > 0.0) {
    Rng noise_rng = Rng::substream(config.seed, "event-noise");
    const uint64_t n =
        noise_rng.poisson(config.noise_event_rate * config.duration_s);
    for (uint64_t j = 0; j < n; ++j) {
      Event ev;
      ev.x = int32_t(noise_rng.uniform_int(uint64_t(K.width)));
      ev.y = int32_t(noise_rng.uniform_int(uint64_t(K.height)));
      ev.t_us = int64_t(noise_rng.uniform_int(uint64_t(duration_us) + 1));
      ev.polarity = noise_rng.uniform_int(2) ? int8_t(1) : int8_t(-1);
      events.push_back(ev);
    }
  }

  std::sort(events.begin(), events.end(), event_order);
  return events;
}

PointCloud simulate_cloud(const SceneConfig& config) {
  config.validate();
  const TargetGeometry geo = build_geometry(config.target);
  const Pose& pose = config.gt_pose_target_to_lidar;
  const double L = config.target.edge_length;
  Rng rng = Rng::substream(config.seed, "lidar");

  PointCloud cloud;
  cloud.points.reserve(size_t(3 * config.points_per_face));
  Point3 bbox_min = Point3::Constant(std::numeric_limits<double>::max());
  Point3 bbox_max = Point3::Constant(std::numeric_limits<double>::lowest());
  for (const FaceFrame& frame : geo.face_frames) {
    for (int i = 0; i < config.points_per_face; ++i) {
      const double u = rng.uniform(0.0, L);
      const double v = rng.uniform(0.0, L);
      Point3 p = pose * (frame.origin + u * frame.axis_u + v * frame.axis_v);
      bbox_min = bbox_min.cwiseMin(p);
      bbox_max = bbox_max.cwiseMax(p);
      if (config.lidar_noise_sigma > 0.0) {
        p += config.lidar_noise_sigma *
             Point3(rng.normal(), rng.normal(), rng.normal());
      }
      cloud.points.push_back(p);
    }
  }

  const int64_t n_outliers =
      std::llround(config.lidar_outlier_fraction * 3.0 * config.points_per_face);
  const Point3 center = 0.5 * (bbox_min + bbox_max);
  const Point3 half_span = bbox_max - bbox_min;  // 2x the tight half extent
  for (int64_t j = 0; j < n_outliers; ++j) {
    Point3 p;
    for (int a = 0; a < 3; ++a)
      p[a] = center[a] + rng.uniform(-half_span[a], half_span[a]);
    cloud.points.push_back(p);
  }
  return cloud;
}

std::pair<GrayImage, std::vector<MarkerDetection>> simulate_rgb(
    const SceneConfig& config) {
  config.validate();
  const TargetGeometry geo = build_geometry(config.target);
  const MarkerDictionary dict = builtin_dictionary(config.target.dictionary);
  const Pose target_to_rgb =
      compose(config.gt_pose_lidar_to_rgb, config.gt_pose_target_to_lidar);
  const Pose rgb_to_target = invert(target_to_rgb);
  const CameraIntrinsics& K = config.rgb_camera;
  const double L = config.target.edge_length;
  const double side = config.target.marker_side;

  // Face planes in the camera frame. All three contain the target origin.
  const Eigen::Matrix3d R = target_to_rgb.rotation_matrix();
  std::array<Point3, 3> plane_normal;
  std::array<double, 3> plane_offset;
  for (int f = 0; f < 3; ++f) {
    plane_normal[size_t(f)] = R * geo.face_frames[size_t(f)].normal;
    plane_offset[size_t(f)] =
        plane_normal[size_t(f)].dot(target_to_rgb.translation);
  }

  // Marker squares are axis-aligned in face coordinates; corner 0 is the
  // low-(u, v) corner.
  std::array<std::array<Point2, kMarkersPerFace>, 3> square_lo;
  for (int f = 0; f < 3; ++f)
    for (int s = 0; s < kMarkersPerFace; ++s)
      square_lo[size_t(f)][size_t(s)] = marker_corners_on_face(config.target, s)[0];

  auto face_value = [&](int f, double u, double v) -> uint8_t {
    for (int s = 0; s < kMarkersPerFace; ++s) {
      const Point2& lo = square_lo[size_t(f)][size_t(s)];
      const double mu = u - lo.x();
      const double mv = v - lo.y();
      if (mu < 0.0 || mu >= side || mv < 0.0 || mv >= side) continue;
      const int col = std::min(5, int(6.0 * mu / side));
      const int row = std::min(5, int(6.0 * mv / side));
      if (row == 0 || col == 0 || row == 5 || col == 5) return 0;
      const uint16_t code =
          dict.codes[size_t(config.target.marker_ids[size_t(f)][size_t(s)])];
      const int bit = (row - 1) * dict.grid + (col - 1);
      return (code >> bit) & 1 ? uint8_t(255) : uint8_t(0);
    }
    return 255;
  };

  GrayImage img(K.width, K.height, 255);
  for (int y = 0; y < K.height; ++y) {
    for (int x = 0; x < K.width; ++x) {
      const Point2 xn = K.has_distortion()
                            ? undistort_normalized(Point2(x, y), K)
                            : K.pixel_to_normalized(Point2(x, y));
      const Point3 ray(xn.x(), xn.y(), 1.0);
      double best_t = std::numeric_limits<double>::max();
      uint8_t value = 255;
      for (int f = 0; f < 3; ++f) {
        const double denom = plane_normal[size_t(f)].dot(ray);
        if (std::abs(denom) < 1e-12) continue;
        const double t = plane_offset[size_t(f)] / denom;
        if (t <= 0.0 || t >= best_t) continue;
        const Point3 q = rgb_to_target * (t * ray);
        const double u = q.dot(geo.face_frames[size_t(f)].axis_u);
        const double v = q.dot(geo.face_frames[size_t(f)].axis_v);
        if (u < 0.0 || u > L || v < 0.0 || v > L) continue;
        best_t = t;
        value = face_value(f, u, v);
      }
      img.at(x, y) = value;
    }
  }

  std::vector<MarkerDetection> truth;
  truth.reserve(3 * kMarkersPerFace);
  for (int f = 0; f < 3; ++f) {
    for (int s = 0; s < kMarkersPerFace; ++s) {
      MarkerDetection det;
      det.id = config.target.marker_ids[size_t(f)][size_t(s)];
      for (int k = 0; k < 4; ++k) {
        const Point3 corner_lidar =
            config.gt_pose_target_to_lidar *
            geo.aruco_corners[size_t((f * kMarkersPerFace + s) * 4 + k)];
        det.corners[size_t(k)] =
            project(corner_lidar, config.gt_pose_lidar_to_rgb, K);
        const Point2& c = det.corners[size_t(k)];
        if (!(c.x() >= 0.0 && c.x() < K.width && c.y() >= 0.0 && c.y() < K.height))
          throw CalibError(Errc::MarkerOutOfFrame,
                           "marker " + std::to_string(det.id) + " corner " +
                               std::to_string(k) + " projects outside the frame");
      }
      truth.push_back(det);
    }
  }
  std::sort(truth.begin(), truth.end(),
            [](const MarkerDetection& a, const MarkerDetection& b) {
              return a.id < b.id;
            });

  if (config.pixel_noise_sigma > 0.0) {
    Rng rng = Rng::substream(config.seed, "rgb-noise");
    for (MarkerDetection& det : truth)
      for (Point2& c : det.corners) {
        c.x() += rng.normal(0.0, config.pixel_noise_sigma);
        c.y() += rng.normal(0.0, config.pixel_noise_sigma);
      }
  }
  return {std::move(img), std::move(truth)};
}

SceneConfig load_scene(const std::string& path) {
  toml::Value root = toml::parse_file(path);
  SceneConfig cfg;
  cfg.target = target_from_toml(root.at("target"));
  cfg.gt_pose_target_to_lidar =
      pose_from_toml(root.at("poses").at("target_to_lidar"), "poses.target_to_lidar");
  cfg.gt_pose_lidar_to_event =
      pose_from_toml(root.at("poses").at("lidar_to_event"), "poses.lidar_to_event");
  cfg.gt_pose_lidar_to_rgb =
      pose_from_toml(root.at("poses").at("lidar_to_rgb"), "poses.lidar_to_rgb");
  cfg.event_camera = intrinsics_from_toml(root.at("event_camera"));
  cfg.rgb_camera = intrinsics_from_toml(root.at("rgb_camera"));

  const toml::Value& led = root.at("led");
  cfg.led.footprint_radius = led.get_double_or("footprint_radius", 4.0);
  cfg.led.contrast_threshold = led.get_double_or("contrast_threshold", 0.3);
  cfg.led.on_level = led.get_double_or("on_level", 1.0);
  cfg.led.off_level = led.get_double_or("off_level", 0.0);

  cfg.duration_s = root.get_double_or("duration_s", 1.0);
  cfg.lidar_noise_sigma = root.get_double_or("lidar_noise_sigma", 0.0);
  cfg.lidar_outlier_fraction = root.get_double_or("lidar_outlier_fraction", 0.0);
  cfg.pixel_noise_sigma = root.get_double_or("pixel_noise_sigma", 0.0);
  cfg.event_jitter_sigma_us = root.get_double_or("event_jitter_sigma_us", 0.0);
  cfg.noise_event_rate = root.get_double_or("noise_event_rate", 0.0);
  cfg.points_per_face = int(root.get_int_or("points_per_face", 2000));
  cfg.seed = uint64_t(root.get_int_or("seed", 0));
  cfg.validate();
  return cfg;
}

void save_scene(const SceneConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write '" + path + "'");
  out << "duration_s = " << fmt_double(config.duration_s) << "\n";
  out << "lidar_noise_sigma = " << fmt_double(config.lidar_noise_sigma) << "\n";
  out << "lidar_outlier_fraction = " << fmt_double(config.lidar_outlier_fraction)
      << "\n";
  out << "pixel_noise_sigma = " << fmt_double(config.pixel_noise_sigma) << "\n";
  out << "event_jitter_sigma_us = " << fmt_double(config.event_jitter_sigma_us)
      << "\n";
  out << "noise_event_rate = " << fmt_double(config.noise_event_rate) << "\n";
  out << "points_per_face = " << config.points_per_face << "\n";
  out << "seed = " << config.seed << "\n\n";

  write_target_toml(out, config.target, "target");
  out << "\n[led]\n";
  out << "footprint_radius = " << fmt_double(config.led.footprint_radius) << "\n";
  out << "contrast_threshold = " << fmt_double(config.led.contrast_threshold)
      << "\n";
  out << "on_level = " << fmt_double(config.led.on_level) << "\n";
  out << "off_level = " << fmt_double(config.led.off_level) << "\n\n";

  out << "[event_camera]\n";
  write_intrinsics_toml(out, config.event_camera);
  out << "\n[rgb_camera]\n";
  write_intrinsics_toml(out, config.rgb_camera);
  out << "\n";
  write_pose_toml(out, "poses.target_to_lidar", config.gt_pose_target_to_lidar);
  write_pose_toml(out, "poses.lidar_to_event", config.gt_pose_lidar_to_event);
  write_pose_toml(out, "poses.lidar_to_rgb", config.gt_pose_lidar_to_rgb);
  if (!out) throw CalibError(Errc::IoError, "failed writing '" + path + "'");
}

SceneManifest write_scene(const SceneConfig& config, const std::string& dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw CalibError(Errc::IoError, "cannot create '" + dir + "': " + ec.message());
  const auto path = [&dir](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  write_events(simulate_events(config, config.led), path("events.csv"));
  write_cloud(simulate_cloud(config), path("cloud.ply"));
  auto [img, truth] = simulate_rgb(config);
  write_image(img, path("rgb.pgm"));

  nlohmann::json dets = nlohmann::json::array();
  for (const MarkerDetection& det : truth) {
    nlohmann::json d;
    d["id"] = det.id;
    d["corners"] = nlohmann::json::array();
    for (const Point2& c : det.corners) d["corners"].push_back({c.x(), c.y()});
    dets.push_back(d);
  }
  {
    std::ofstream out(path("detections.json"), std::ios::binary);
    if (!out) throw CalibError(Errc::IoError, "cannot write detections.json");
    out << dets.dump(2) << "\n";
  }

  const TargetGeometry geo = build_geometry(config.target);
  const Pose target_to_event =
      compose(config.gt_pose_lidar_to_event, config.gt_pose_target_to_lidar);
  nlohmann::json gt;
  gt["gt_pose_target_to_lidar"] = pose_to_json(config.gt_pose_target_to_lidar);
  gt["gt_pose_lidar_to_event"] = pose_to_json(config.gt_pose_lidar_to_event);
  gt["gt_pose_lidar_to_rgb"] = pose_to_json(config.gt_pose_lidar_to_rgb);
  gt["event_intrinsics"] = intrinsics_to_json(config.event_camera);
  gt["rgb_intrinsics"] = intrinsics_to_json(config.rgb_camera);
  gt["led_frequencies_hz"] = config.target.led_frequencies_hz;
  gt["corners_lidar_m"] = nlohmann::json::array();
  gt["led_centers_event_px"] = nlohmann::json::array();
  for (int i = 0; i < kNumLeds; ++i) {
    const Point3 p = config.gt_pose_target_to_lidar * geo.corners[size_t(i)];
    gt["corners_lidar_m"].push_back({p.x(), p.y(), p.z()});
    const Point2 c = project(geo.corners[size_t(i)], target_to_event,
                             config.event_camera);
    gt["led_centers_event_px"].push_back({c.x(), c.y()});
  }
  gt["aruco_corners_lidar_m"] = nlohmann::json::array();
  gt["aruco_corners_rgb_px"] = nlohmann::json::array();
  for (int i = 0; i < kNumMarkerCorners; ++i) {
    const Point3 p = config.gt_pose_target_to_lidar * geo.aruco_corners[size_t(i)];
    gt["aruco_corners_lidar_m"].push_back({p.x(), p.y(), p.z()});
    const Point2 c = project(p, config.gt_pose_lidar_to_rgb, config.rgb_camera);
    gt["aruco_corners_rgb_px"].push_back({c.x(), c.y()});
  }
  {
    std::ofstream out(path("groundtruth.json"), std::ios::binary);
    if (!out) throw CalibError(Errc::IoError, "cannot write groundtruth.json");
    out << gt.dump(2) << "\n";
  }

  save_scene(config, path("scene.toml"));

  SceneManifest manifest;
  manifest.seed = config.seed;
  manifest.config_digest = hex64(file_digest(path("scene.toml")));
  const char* names[] = {"events.csv",     "cloud.ply",        "rgb.pgm",
                         "detections.json", "groundtruth.json", "scene.toml"};
  for (const char* name : names)
    manifest.file_digests[name] = hex64(file_digest(path(name)));

  nlohmann::json mj;
  mj["config_digest"] = manifest.config_digest;
  mj["seed"] = manifest.seed;
  mj["files"] = manifest.file_digests;
  std::ofstream out(path("manifest.json"), std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write manifest.json");
  out << mj.dump(2) << "\n";
  if (!out) throw CalibError(Errc::IoError, "failed writing manifest.json");
  return manifest;
}

}  // namespace calibcube
