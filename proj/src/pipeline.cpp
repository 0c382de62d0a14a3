#include "calibcube/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "calibcube/aruco.hpp"
#include "calibcube/digest.hpp"
#include "calibcube/error.hpp"
#include "calibcube/events.hpp"
#include "calibcube/numfmt.hpp"
#include "calibcube/simulator.hpp"
#include "calibcube/toml.hpp"

namespace calibcube {
namespace {

std::string extension_of(const std::string& path) {
  size_t dot = path.find_last_of('.');
  size_t sep = path.find_last_of('/');
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep)) return "";
  return path.substr(dot);
}

std::string resolve_against(const std::filesystem::path& dir, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return p;
  return (dir / fp).lexically_normal().string();
}

void require_file(const std::string& path, const char* key) {
  if (!std::filesystem::exists(path))
    throw CalibError(Errc::ConfigError,
                     std::string("inputs.") + key + ": '" + path + "' does not exist");
}

uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

nlohmann::json point2_json(const Point2& p) {
  return nlohmann::json::array({p.x(), p.y()});
}

nlohmann::json point3_json(const Point3& p) {
  return nlohmann::json::array({p.x(), p.y(), p.z()});
}

// --- ground-truth JSON access -------------------------------------------

const nlohmann::json& require_key(const nlohmann::json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw CalibError(Errc::ConfigError, "ground truth is missing key '" + key + "'");
  return *it;
}

Pose pose_from_json(const nlohmann::json& j, const std::string& key) {
  const auto& q = require_key(j, "rotation_quaternion_wxyz");
  const auto& t = require_key(j, "translation_m");
  if (!q.is_array() || q.size() != 4 || !t.is_array() || t.size() != 3)
    throw CalibError(Errc::ConfigError, key + ": malformed pose");
  return Pose(Eigen::Quaterniond(q[0].get<double>(), q[1].get<double>(),
                                 q[2].get<double>(), q[3].get<double>()),
              Point3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
}

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j, const std::string& key) {
  CameraIntrinsics K;
  K.fx = require_key(j, "fx").get<double>();
  K.fy = require_key(j, "fy").get<double>();
  K.cx = require_key(j, "cx").get<double>();
  K.cy = require_key(j, "cy").get<double>();
  const auto& d = require_key(j, "dist");
  if (!d.is_array() || d.size() != 5)
    throw CalibError(Errc::ConfigError, key + ".dist: expected 5 coefficients");
  for (size_t i = 0; i < 5; ++i) K.dist[i] = d[i].get<double>();
  K.width = require_key(j, "width").get<int>();
  K.height = require_key(j, "height").get<int>();
  K.validate();
  return K;
}

// --- SVG helpers ---------------------------------------------------------

std::string base64_encode(const std::vector<uint8_t>& data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8 | data[i + 2];
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
  }
  if (i + 1 == data.size()) {
    uint32_t v = uint32_t(data[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == data.size()) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string depth_color(double t) {
  int r = int(std::lround(255.0 * (1.0 - t)));
  int b = int(std::lround(255.0 * t));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x00%02x", r, b);
  return buf;
}

}  // namespace

// --- config --------------------------------------------------------------

void PipelineConfig::validate() const {
  frequency.validate();
  ransac.validate();
  const bool has_image = !image_path.empty();
  const bool has_dets = !detections_path.empty();
  if (has_image == has_dets)
    throw CalibError(Errc::ConfigError,
                     "inputs: set exactly one of 'image' and 'detections'");
  const std::pair<const std::string*, const char*> required[] = {
      {&events_path, "events"},
      {&cloud_path, "cloud"},
      {&event_intrinsics_path, "event_intrinsics"},
      {&rgb_intrinsics_path, "rgb_intrinsics"},
      {&target_path, "target"}};
  for (const auto& [p, key] : required)
    if (p->empty())
      throw CalibError(Errc::ConfigError, std::string("inputs.") + key + " is required");
  if (out_dir.empty())
    throw CalibError(Errc::ConfigError, "out_dir is required");
  if (roi && !(roi->min.x() < roi->max.x() && roi->min.y() < roi->max.y() &&
               roi->min.z() < roi->max.z()))
    throw CalibError(Errc::ConfigError, "roi: min must be below max on every axis");
}

PipelineConfig load_pipeline(const std::string& path) {
  toml::Value root = toml::parse_file(path);
  PipelineConfig cfg;

  const toml::Value& in = root.at("inputs");
  const auto dir = std::filesystem::path(path).parent_path();
  cfg.events_path = resolve_against(dir, in.get_string("events"));
  cfg.cloud_path = resolve_against(dir, in.get_string("cloud"));
  cfg.image_path = resolve_against(dir, in.get_string_or("image", ""));
  cfg.detections_path = resolve_against(dir, in.get_string_or("detections", ""));
  cfg.event_intrinsics_path = resolve_against(dir, in.get_string("event_intrinsics"));
  cfg.rgb_intrinsics_path = resolve_against(dir, in.get_string("rgb_intrinsics"));
  cfg.target_path = resolve_against(dir, in.get_string("target"));

  cfg.out_dir = root.get_string_or("out_dir", "out");
  cfg.seed = uint64_t(root.get_int_or("seed", 0));

  if (root.contains("frequency")) {
    const toml::Value& f = root.at("frequency");
    cfg.frequency.bin_dt_us = f.get_int_or("bin_dt_us", cfg.frequency.bin_dt_us);
    cfg.frequency.n_segments = int(f.get_int_or("n_segments", cfg.frequency.n_segments));
    cfg.frequency.f_min_hz = f.get_double_or("f_min_hz", cfg.frequency.f_min_hz);
    cfg.frequency.f_max_hz = f.get_double_or("f_max_hz", cfg.frequency.f_max_hz);
    cfg.frequency.min_active_bins =
        int(f.get_int_or("min_active_bins", cfg.frequency.min_active_bins));
  }
  if (root.contains("ransac")) {
    const toml::Value& r = root.at("ransac");
    cfg.ransac.inlier_threshold =
        r.get_double_or("inlier_threshold_m", cfg.ransac.inlier_threshold);
    cfg.ransac.max_iterations =
        int(r.get_int_or("max_iterations", cfg.ransac.max_iterations));
    cfg.ransac.min_inliers = int(r.get_int_or("min_inliers", cfg.ransac.min_inliers));
  }
  // The RANSAC stream derives from the run seed; there is no separate knob.
  cfg.ransac.seed = cfg.seed;
  if (root.contains("roi")) {
    const toml::Value& r = root.at("roi");
    std::vector<double> lo = r.get_double_array("min_m");
    std::vector<double> hi = r.get_double_array("max_m");
    if (lo.size() != 3 || hi.size() != 3)
      throw CalibError(Errc::ConfigError, "roi.min_m / roi.max_m must have 3 entries");
    RoiBox box;
    box.min = Point3(lo[0], lo[1], lo[2]);
    box.max = Point3(hi[0], hi[1], hi[2]);
    cfg.roi = box;
  }
  cfg.validate();

  // Digest of the canonical form with out_dir blanked: it identifies the
  // calibration problem, not where the results land.
  PipelineConfig canon = cfg;
  canon.out_dir = "out";
  cfg.config_digest = hex64(fnv1a64(pipeline_toml_string(canon)));
  return cfg;
}

std::string pipeline_toml_string(const PipelineConfig& config) {
  std::ostringstream out;
  out << "seed = " << config.seed << "\n";
  out << "out_dir = \"" << config.out_dir << "\"\n\n";
  out << "[inputs]\n";
  out << "events = \"" << config.events_path << "\"\n";
  out << "cloud = \"" << config.cloud_path << "\"\n";
  if (!config.image_path.empty()) out << "image = \"" << config.image_path << "\"\n";
  if (!config.detections_path.empty())
    out << "detections = \"" << config.detections_path << "\"\n";
  out << "event_intrinsics = \"" << config.event_intrinsics_path << "\"\n";
  out << "rgb_intrinsics = \"" << config.rgb_intrinsics_path << "\"\n";
  out << "target = \"" << config.target_path << "\"\n";
  out << "\n[frequency]\n";
  out << "bin_dt_us = " << config.frequency.bin_dt_us << "\n";
  out << "n_segments = " << config.frequency.n_segments << "\n";
  out << "f_min_hz = " << fmt_double(config.frequency.f_min_hz) << "\n";
  out << "f_max_hz = " << fmt_double(config.frequency.f_max_hz) << "\n";
  out << "min_active_bins = " << config.frequency.min_active_bins << "\n";
  out << "\n[ransac]\n";
  out << "inlier_threshold_m = " << fmt_double(config.ransac.inlier_threshold) << "\n";
  out << "max_iterations = " << config.ransac.max_iterations << "\n";
  out << "min_inliers = " << config.ransac.min_inliers << "\n";
  if (config.roi) {
    out << "\n[roi]\n";
    out << "min_m = [" << fmt_double(config.roi->min.x()) << ", "
        << fmt_double(config.roi->min.y()) << ", " << fmt_double(config.roi->min.z())
        << "]\n";
    out << "max_m = [" << fmt_double(config.roi->max.x()) << ", "
        << fmt_double(config.roi->max.y()) << ", " << fmt_double(config.roi->max.z())
        << "]\n";
  }
  return out.str();
}

void save_pipeline(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write '" + path + "'");
  out << pipeline_toml_string(config);
  if (!out) throw CalibError(Errc::IoError, "failed writing '" + path + "'");
}

// --- calibration run -----------------------------------------------------

std::vector<std::string> PipelineResult::failures() const {
  std::vector<std::string> out;
  if (!event.ok) out.push_back("event branch: " + event.error);
  if (!lidar.ok) out.push_back("lidar branch: " + lidar.error);
  if (!rgb.ok) out.push_back("rgb branch: " + rgb.error);
  if (!event_lidar.ok) out.push_back("lidar->event solve: " + event_lidar.error);
  if (!rgb_lidar.ok) out.push_back("lidar->rgb solve: " + rgb_lidar.error);
  return out;
}

PipelineResult run_calibration(const PipelineConfig& config) {
  config.validate();
  require_file(config.events_path, "events");
  require_file(config.cloud_path, "cloud");
  if (!config.image_path.empty()) require_file(config.image_path, "image");
  if (!config.detections_path.empty())
    require_file(config.detections_path, "detections");
  require_file(config.event_intrinsics_path, "event_intrinsics");
  require_file(config.rgb_intrinsics_path, "rgb_intrinsics");
  require_file(config.target_path, "target");

  const TargetSpec spec = load_target(config.target_path);
  const TargetGeometry geometry = build_geometry(spec);
  const CameraIntrinsics event_K = load_intrinsics(config.event_intrinsics_path);
  const CameraIntrinsics rgb_K = load_intrinsics(config.rgb_intrinsics_path);
  RansacParams ransac = config.ransac;
  ransac.seed = config.seed;

  auto event_task = [&config, &spec, &event_K]() {
    EventBranch b;
    try {
      std::vector<Event> events = read_events(config.events_path);
      if (events.empty())
        throw CalibError(Errc::SegmentTooShort, "event stream is empty");
      std::vector<TimeWindow> segments =
          split_segments(events.front().t_us, events.back().t_us + 1,
                         config.frequency.n_segments);
      std::vector<FrequencyMap> maps;
      maps.reserve(segments.size());
      for (TimeWindow w : segments)
        maps.push_back(estimate_frequency_map(events, w, config.frequency,
                                              event_K.width, event_K.height));
      b.selected_map = select_best_map(maps);
      b.bbox = *active_bbox(maps[b.selected_map]);
      const double max_nominal = *std::max_element(spec.led_frequencies_hz.begin(),
                                                   spec.led_frequencies_hz.end());
      b.keypoints = extract_led_keypoints(maps[b.selected_map], b.bbox, spec,
                                          frequency_tolerance(spec, max_nominal));
      b.ok = true;
    } catch (const std::exception& e) {
      b.error = e.what();
    }
    return b;
  };

  auto lidar_task = [&config, &ransac, &geometry]() {
    LidarBranch b;
    try {
      PointCloud cloud = read_cloud(config.cloud_path);
      if (config.roi) cloud = crop_cloud(cloud, *config.roi);
      PlaneSet set = sequential_ransac_planes(cloud, ransac);
      LabeledPlanes labeled = orthogonalize_and_label(set.planes, cloud, set.inliers);
      std::array<std::vector<int>, 3> face_inliers;
      for (int f = 0; f < 3; ++f)
        face_inliers[size_t(f)] = set.inliers[size_t(labeled.source[size_t(f)])];
      labeled = refine_face_planes(cloud, labeled, face_inliers, ransac);
      Point3 e0 = intersect_three_planes(labeled.planes);
      CubeDetection det = derive_target_points(labeled, e0, geometry);
      b.planes = det.planes;
      for (int f = 0; f < 3; ++f)
        b.inlier_counts[size_t(f)] = int(face_inliers[size_t(f)].size());
      b.corners = det.corners;
      b.aruco_corners = det.aruco_corners;
      b.ok = true;
    } catch (const std::exception& e) {
      b.error = e.what();
    }
    return b;
  };

  auto rgb_task = [&config, &spec]() {
    RgbBranch b;
    try {
      const MarkerDictionary& dict = builtin_dictionary(spec.dictionary);
      std::vector<MarkerDetection> dets;
      if (!config.detections_path.empty())
        dets = load_external_detections(config.detections_path, dict);
      else
        dets = detect_markers(read_image(config.image_path), dict);
      if (dets.empty()) throw CalibError(Errc::NoMatch, "no markers detected");
      b.matches = match_to_target(dets, spec);
      for (const MarkerDetection& d : dets) b.marker_ids.push_back(d.id);
      std::sort(b.marker_ids.begin(), b.marker_ids.end());
      b.ok = true;
    } catch (const std::exception& e) {
      b.error = e.what();
    }
    return b;
  };

  auto fe = std::async(std::launch::async, event_task);
  auto fl = std::async(std::launch::async, lidar_task);
  auto fr = std::async(std::launch::async, rgb_task);

  PipelineResult res;
  res.event = fe.get();
  res.lidar = fl.get();
  res.rgb = fr.get();

  if (res.event.ok && res.lidar.ok) {
    try {
      auto [ext, stats] =
          calibrate_event_lidar(res.lidar.corners, res.event.keypoints, event_K);
      res.event_lidar.ext = ext;
      res.event_lidar.stats = stats;
      res.event_lidar.ok = true;
    } catch (const std::exception& e) {
      res.event_lidar.error = e.what();
    }
  } else {
    res.event_lidar.error = res.lidar.ok ? "not attempted: event branch failed"
                                         : "not attempted: lidar branch failed";
  }
  if (res.rgb.ok && res.lidar.ok) {
    try {
      auto [ext, stats] =
          calibrate_rgb_lidar(res.lidar.aruco_corners, res.rgb.matches, rgb_K);
      res.rgb_lidar.ext = ext;
      res.rgb_lidar.stats = stats;
      res.rgb_lidar.ok = true;
    } catch (const std::exception& e) {
      res.rgb_lidar.error = e.what();
    }
  } else {
    res.rgb_lidar.error = res.lidar.ok ? "not attempted: rgb branch failed"
                                       : "not attempted: lidar branch failed";
  }
  return res;
}

// --- outputs ---------------------------------------------------------------

void write_calibration_outputs(const PipelineConfig& config,
                               const PipelineResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw CalibError(Errc::IoError,
                     "cannot create '" + config.out_dir + "': " + ec.message());
  const auto out_path = [&config](const char* name) {
    return (std::filesystem::path(config.out_dir) / name).string();
  };

  if (result.event_lidar.ok)
    save_extrinsics({result.event_lidar.ext, result.event_lidar.stats,
                     config.config_digest, config.seed},
                    out_path("extrinsics_lidar_to_event.json"));
  if (result.rgb_lidar.ok)
    save_extrinsics({result.rgb_lidar.ext, result.rgb_lidar.stats,
                     config.config_digest, config.seed},
                    out_path("extrinsics_lidar_to_rgb.json"));

  nlohmann::json rep;
  rep["config_digest"] = config.config_digest;
  rep["seed"] = config.seed;

  nlohmann::json inputs;
  inputs["events"] = hex64(file_digest(config.events_path));
  inputs["cloud"] = hex64(file_digest(config.cloud_path));
  if (!config.image_path.empty())
    inputs["image"] = hex64(file_digest(config.image_path));
  if (!config.detections_path.empty())
    inputs["detections"] = hex64(file_digest(config.detections_path));
  inputs["event_intrinsics"] = hex64(file_digest(config.event_intrinsics_path));
  inputs["rgb_intrinsics"] = hex64(file_digest(config.rgb_intrinsics_path));
  inputs["target"] = hex64(file_digest(config.target_path));
  rep["input_digests"] = inputs;

  nlohmann::json ev;
  ev["ok"] = result.event.ok;
  if (result.event.ok) {
    ev["selected_map_index"] = result.event.selected_map;
    ev["bbox_px"] = {result.event.bbox.min.x(), result.event.bbox.min.y(),
                     result.event.bbox.max.x(), result.event.bbox.max.y()};
    nlohmann::json leds = nlohmann::json::array();
    for (const LedKeypoint& kp : result.event.keypoints) {
      nlohmann::json led;
      led["corner_index"] = kp.corner_index;
      led["frequency_hz"] = kp.frequency_hz;
      led["center_px"] = point2_json(kp.center);
      led["degraded"] = kp.degraded;
      leds.push_back(led);
    }
    ev["leds"] = leds;
  } else {
    ev["error"] = result.event.error;
  }

  nlohmann::json li;
  li["ok"] = result.lidar.ok;
  if (result.lidar.ok) {
    nlohmann::json normals = nlohmann::json::array();
    nlohmann::json offsets = nlohmann::json::array();
    for (const Plane& p : result.lidar.planes) {
      normals.push_back(point3_json(p.normal));
      offsets.push_back(p.offset);
    }
    li["plane_normals"] = normals;
    li["plane_offsets_m"] = offsets;
    li["inlier_counts"] = result.lidar.inlier_counts;
  } else {
    li["error"] = result.lidar.error;
  }

  nlohmann::json rg;
  rg["ok"] = result.rgb.ok;
  if (result.rgb.ok) {
    rg["marker_ids"] = result.rgb.marker_ids;
    rg["matched_corners"] = result.rgb.matches.size();
  } else {
    rg["error"] = result.rgb.error;
  }

  rep["branches"] = {{"event", ev}, {"lidar", li}, {"rgb", rg}};

  const auto solve_json = [](const SolveOutcome& s, const char* file) {
    nlohmann::json j;
    j["ok"] = s.ok;
    if (s.ok) {
      j["file"] = file;
      j["e_mean_px"] = s.stats.mean;
      j["e_max_px"] = s.stats.max;
      const Eigen::Quaterniond& q = s.ext.pose.rotation;
      j["rotation_quaternion_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
      j["translation_m"] = point3_json(s.ext.pose.translation);
    } else {
      j["error"] = s.error;
    }
    return j;
  };
  rep["calibrations"] = {
      {"lidar_to_event",
       solve_json(result.event_lidar, "extrinsics_lidar_to_event.json")},
      {"lidar_to_rgb", solve_json(result.rgb_lidar, "extrinsics_lidar_to_rgb.json")}};

  {
    std::ofstream out(out_path("report.json"), std::ios::binary);
    if (!out) throw CalibError(Errc::IoError, "cannot write report.json");
    out << rep.dump(2) << "\n";
  }

  if (!result.event_lidar.ok && !result.rgb_lidar.ok) return;
  const PointCloud cloud = read_cloud(config.cloud_path);
  if (result.event_lidar.ok) {
    const CameraIntrinsics event_K = load_intrinsics(config.event_intrinsics_path);
    const GrayImage frame = accumulate_event_frame(read_events(config.events_path),
                                                   event_K.width, event_K.height);
    write_overlay_svg(frame, cloud, result.event_lidar.ext.pose, event_K,
                      config.config_digest, config.seed,
                      out_path("overlay_lidar_to_event.svg"));
  }
  if (result.rgb_lidar.ok && !config.image_path.empty()) {
    const CameraIntrinsics rgb_K = load_intrinsics(config.rgb_intrinsics_path);
    write_overlay_svg(read_image(config.image_path), cloud,
                      result.rgb_lidar.ext.pose, rgb_K, config.config_digest,
                      config.seed, out_path("overlay_lidar_to_rgb.svg"));
  }
}

GrayImage accumulate_event_frame(const std::vector<Event>& events, int width,
                                 int height) {
  GrayImage img(width, height, 128);
  if (events.empty()) return img;
  std::vector<int> acc(size_t(width) * size_t(height), 128);
  const int64_t t_end = events.front().t_us + 33333;  // 33.333 ms window
  for (const Event& e : events) {
    if (e.t_us >= t_end) break;
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) continue;
    acc[size_t(e.y) * size_t(width) + size_t(e.x)] += 24 * e.polarity;
  }
  for (size_t i = 0; i < acc.size(); ++i)
    img.pixels[i] = uint8_t(std::clamp(acc[i], 0, 255));
  return img;
}

void write_overlay_svg(const GrayImage& background, const PointCloud& cloud,
                       const Pose& cloud_to_camera, const CameraIntrinsics& K,
                       const std::string& config_digest, uint64_t seed,
                       const std::string& path) {
  struct Dot {
    Point2 px;
    double depth;
  };
  std::vector<Dot> dots;
  dots.reserve(cloud.size());
  double z_min = 0.0, z_max = 0.0;
  for (const Point3& p : cloud.points) {
    const Point3 c = cloud_to_camera * p;
    if (c.z() <= 1e-9) continue;
    const Point2 px = K.normalized_to_pixel(
        distort_normalized(Point2(c.x() / c.z(), c.y() / c.z()), K));
    if (px.x() < 0 || px.x() >= K.width || px.y() < 0 || px.y() >= K.height)
      continue;
    if (dots.empty()) {
      z_min = z_max = c.z();
    } else {
      z_min = std::min(z_min, c.z());
      z_max = std::max(z_max, c.z());
    }
    dots.push_back({px, c.z()});
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\""
         " xmlns:xlink=\"http://www.w3.org/1999/xlink\""
         " width=\"" << K.width << "\" height=\"" << K.height
      << "\" viewBox=\"0 0 " << K.width << " " << K.height << "\">\n";
  svg << "<desc>config_digest=" << config_digest << " seed=" << seed << "</desc>\n";
  svg << "<image width=\"" << K.width << "\" height=\"" << K.height
      << "\" xlink:href=\"data:image/png;base64,"
      << base64_encode(encode_png(background)) << "\"/>\n";
  svg << "<g id=\"points\" fill-opacity=\"0.8\">\n";
  const double span = z_max - z_min;
  for (const Dot& d : dots) {
    const double t = span > 0 ? (d.depth - z_min) / span : 0.0;
    svg << "<circle cx=\"" << fmt_double_fixed(d.px.x(), 2) << "\" cy=\""
        << fmt_double_fixed(d.px.y(), 2) << "\" r=\"1.5\" fill=\""
        << depth_color(t) << "\"/>\n";
  }
  svg << "</g>\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write '" + path + "'");
  out << svg.str();
  if (!out) throw CalibError(Errc::IoError, "failed writing '" + path + "'");
}

// --- evaluation ------------------------------------------------------------

EvaluationResult evaluate_against_groundtruth(const SavedCalibration& calib,
                                              const std::string& groundtruth_path) {
  std::ifstream in(groundtruth_path, std::ios::binary);
  if (!in)
    throw CalibError(Errc::IoError, "cannot open '" + groundtruth_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CalibError(Errc::ParseError, groundtruth_path + ": " + e.what());
  }

  const std::string& src = calib.ext.source_sensor;
  const std::string& dst = calib.ext.target_sensor;
  std::string pose_key, points_key, pixels_key, intr_key, label_prefix;
  if (src == "lidar" && dst == "event") {
    pose_key = "gt_pose_lidar_to_event";
    points_key = "corners_lidar_m";
    pixels_key = "led_centers_event_px";
    intr_key = "event_intrinsics";
    label_prefix = "E_";
  } else if (src == "lidar" && dst == "rgb") {
    pose_key = "gt_pose_lidar_to_rgb";
    points_key = "aruco_corners_lidar_m";
    pixels_key = "aruco_corners_rgb_px";
    intr_key = "rgb_intrinsics";
    label_prefix = "A_";
  } else {
    throw CalibError(Errc::ConfigError, "no ground truth for sensor pair '" + src +
                                            "' -> '" + dst + "'");
  }

  const Pose gt_pose = pose_from_json(require_key(doc, pose_key), pose_key);
  const CameraIntrinsics K =
      intrinsics_from_json(require_key(doc, intr_key), intr_key);
  const auto& pts = require_key(doc, points_key);
  const auto& pxs = require_key(doc, pixels_key);
  if (!pts.is_array() || !pxs.is_array() || pts.size() != pxs.size() ||
      pts.empty())
    throw CalibError(Errc::ConfigError, points_key + " / " + pixels_key +
                                            ": expected equal-length arrays");

  CorrespondenceSet corrs;
  corrs.camera = K;
  for (size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pxs[i];
    if (!p.is_array() || p.size() != 3 || !q.is_array() || q.size() != 2)
      throw CalibError(Errc::ConfigError,
                       points_key + "[" + std::to_string(i) + "]: malformed entry");
    corrs.pairs.push_back({Point3(p[0].get<double>(), p[1].get<double>(),
                                  p[2].get<double>()),
                           Point2(q[0].get<double>(), q[1].get<double>()),
                           label_prefix + std::to_string(i)});
  }

  Extrinsics gt_ext;
  gt_ext.pose = gt_pose;
  gt_ext.source_sensor = src;
  gt_ext.target_sensor = dst;

  EvaluationResult res;
  res.source_sensor = src;
  res.target_sensor = dst;
  res.rotation_error_deg = geodesic_angle(calib.ext.pose, gt_pose) * 180.0 / M_PI;
  res.translation_error_m = (calib.ext.pose.translation - gt_pose.translation).norm();
  res.e_mean_estimate_px = reprojection_stats(corrs, calib.ext).mean;
  res.e_mean_groundtruth_px = reprojection_stats(corrs, gt_ext).mean;
  res.e_mean_delta_px = res.e_mean_estimate_px - res.e_mean_groundtruth_px;
  return res;
}

// --- CLI entry points --------------------------------------------------------

namespace {

int exit_code_for(const CalibError& e) {
  switch (e.code()) {
    case Errc::IoError:
      return 3;
    case Errc::ParseError:
    case Errc::ConfigError:
    case Errc::InvalidSpec:
      return 2;
    default:
      return 4;
  }
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override) {
  try {
    SceneConfig cfg = load_scene(config_path);
    if (seed_override) cfg.seed = *seed_override;
    SceneManifest manifest = write_scene(cfg, out_dir);
    std::cout << "scene written to '" << out_dir
              << "' (config_digest=" << manifest.config_digest
              << ", seed=" << manifest.seed << ")\n";
    return 0;
  } catch (const CalibError& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return 4;
  }
}

int cmd_calibrate(const std::string& config_path, const std::string& out_dir_override,
                  std::optional<uint64_t> seed_override) {
  try {
    PipelineConfig cfg = load_pipeline(config_path);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
    if (seed_override) {
      cfg.seed = *seed_override;
      cfg.ransac.seed = *seed_override;
      PipelineConfig canon = cfg;
      canon.out_dir = "out";
      cfg.config_digest = hex64(fnv1a64(pipeline_toml_string(canon)));
    }
    PipelineResult result = run_calibration(cfg);
    write_calibration_outputs(cfg, result);
    if (result.event_lidar.ok)
      std::cout << "lidar->event E_mean = "
                << fmt_double(result.event_lidar.stats.mean) << " px\n";
    if (result.rgb_lidar.ok)
      std::cout << "lidar->rgb E_mean = " << fmt_double(result.rgb_lidar.stats.mean)
                << " px\n";
    const std::vector<std::string> failures = result.failures();
    for (const std::string& f : failures) std::cerr << "calibrate: " << f << "\n";
    return failures.empty() ? 0 : 4;
  } catch (const CalibError& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return 4;
  }
}

int cmd_evaluate(const std::string& calib_path, const std::string& groundtruth_path,
                 const std::string& out_path) {
  try {
    SavedCalibration calib = load_extrinsics(calib_path);
    EvaluationResult res = evaluate_against_groundtruth(calib, groundtruth_path);

    std::cout << "sensor_pair = " << res.source_sensor << " -> "
              << res.target_sensor << "\n";
    std::cout << "rotation_error_deg = " << fmt_double(res.rotation_error_deg)
              << "\n";
    std::cout << "translation_error_m = " << fmt_double(res.translation_error_m)
              << "\n";
    std::cout << "e_mean_delta_px = " << fmt_double(res.e_mean_delta_px) << "\n";

    nlohmann::json doc;
    doc["source"] = res.source_sensor;
    doc["target"] = res.target_sensor;
    doc["rotation_error_deg"] = res.rotation_error_deg;
    doc["translation_error_m"] = res.translation_error_m;
    doc["e_mean_estimate_px"] = res.e_mean_estimate_px;
    doc["e_mean_groundtruth_px"] = res.e_mean_groundtruth_px;
    doc["e_mean_delta_px"] = res.e_mean_delta_px;
    doc["config_digest"] = calib.config_digest;
    doc["seed"] = calib.seed;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CalibError(Errc::IoError, "cannot write '" + out_path + "'");
    out << doc.dump(2) << "\n";
    return 0;
  } catch (const CalibError& e) {
    std::cerr << "evaluate: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "evaluate: " << e.what() << "\n";
    return 4;
  }
}

int cmd_report(const std::string& calib_path, const std::string& cloud_path,
               const std::string& media_path, const std::string& intrinsics_path,
               const std::string& out_svg) {
  try {
    const SavedCalibration calib = load_extrinsics(calib_path);
    const PointCloud cloud = read_cloud(cloud_path);
    const CameraIntrinsics K = load_intrinsics(intrinsics_path);

    GrayImage background;
    const std::string ext = extension_of(media_path);
    if (ext == ".csv" || ext == ".evb") {
      background = accumulate_event_frame(read_events(media_path), K.width, K.height);
    } else {
      background = read_image(media_path);
      if (background.width != K.width || background.height != K.height)
        throw CalibError(Errc::ConfigError,
                         "image size does not match the intrinsics frame");
    }
    if (cloud.size() == 0)
      std::cerr << "report: warning: point cloud is empty, overlay shows the "
                   "raster only\n";
    write_overlay_svg(background, cloud, calib.ext.pose, K, calib.config_digest,
                      calib.seed, out_svg);
    std::cout << "overlay written to '" << out_svg << "'\n";
    return 0;
  } catch (const CalibError& e) {
    std::cerr << "report: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "report: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace calibcube
