#include "calibcube/pnp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "calibcube/error.hpp"

namespace calibcube {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Pose apply_increment(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  Eigen::Vector3d omega = delta.head<3>();
  double angle = omega.norm();
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 0)
    dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, omega / angle));
  return Pose(dq * pose.rotation, pose.translation + delta.tail<3>());
}

// Undistorted observations on the normalized plane, computed once per solve.
std::vector<Point2> normalized_observations(const CorrespondenceSet& corrs) {
  std::vector<Point2> out;
  out.reserve(corrs.pairs.size());
  for (const Correspondence& c : corrs.pairs)
    out.push_back(undistort_normalized(c.pixel, corrs.camera));
  return out;
}

struct PointShape {
  Point3 centroid;
  Eigen::Matrix3d axes;           // right singular vectors, right-handed
  Eigen::Vector3d singular_values;  // descending
};

PointShape analyze_points(const std::vector<Correspondence>& pairs) {
  PointShape shape;
  shape.centroid = Point3::Zero();
  for (const Correspondence& c : pairs) shape.centroid += c.point;
  shape.centroid /= double(pairs.size());
  Eigen::MatrixXd centered(pairs.size(), 3);
  for (size_t i = 0; i < pairs.size(); ++i)
    centered.row(Eigen::Index(i)) = (pairs[i].point - shape.centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  shape.singular_values = svd.singularValues();
  shape.axes = svd.matrixV();
  shape.axes.col(2) = shape.axes.col(0).cross(shape.axes.col(1));
  return shape;
}

bool points_in_front(const std::vector<Correspondence>& pairs, const Pose& pose) {
  for (const Correspondence& c : pairs)
    if ((pose * c.point).z() <= 1e-9) return false;
  return true;
}

double cost_at(const CorrespondenceSet& corrs, const Pose& pose) {
  return pnp_residuals(corrs, pose).squaredNorm();
}

// Least-squares translation for a fixed rotation from the collinearity
// constraint ray x (R p + t) = 0.
Pose translation_for_rotation(const Eigen::Matrix3d& r,
                              const std::vector<Correspondence>& pairs,
                              const std::vector<Point2>& obs) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < pairs.size(); ++i) {
    Eigen::Matrix3d a = skew(Eigen::Vector3d(obs[i].x(), obs[i].y(), 1.0));
    Eigen::Vector3d b = -a * (r * pairs[i].point);
    ata += a.transpose() * a;
    atb += a.transpose() * b;
  }
  Eigen::Vector3d t = ata.ldlt().solve(atb);
  return Pose(Eigen::Quaterniond(r), t);
}

Pose dlt_init(const std::vector<Correspondence>& pairs, const std::vector<Point2>& obs) {
  const size_t n = pairs.size();
  Eigen::MatrixXd m(2 * n, 12);
  for (size_t i = 0; i < n; ++i) {
    const Point3& p = pairs[i].point;
    double x = obs[i].x(), y = obs[i].y();
    m.row(Eigen::Index(2 * i)) << p.x(), p.y(), p.z(), 1, 0, 0, 0, 0, -x * p.x(),
        -x * p.y(), -x * p.z(), -x;
    m.row(Eigen::Index(2 * i + 1)) << 0, 0, 0, 0, p.x(), p.y(), p.z(), 1, -y * p.x(),
        -y * p.y(), -y * p.z(), -y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::Matrix<double, 12, 1> v = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj;
  proj.row(0) = v.segment<4>(0);
  proj.row(1) = v.segment<4>(4);
  proj.row(2) = v.segment<4>(8);

  double depth_sign = 0;
  for (size_t i = 0; i < n; ++i)
    depth_sign += proj.row(2) * pairs[i].point.homogeneous();
  if (depth_sign < 0) proj = -proj;

  Eigen::Matrix3d a = proj.leftCols<3>();
  Eigen::JacobiSVD<Eigen::Matrix3d> asvd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = asvd.matrixU() * asvd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = asvd.matrixU();
    u.col(2) = -u.col(2);
    r = u * asvd.matrixV().transpose();
  }
  double scale = asvd.singularValues().mean();
  Eigen::Vector3d t = proj.col(3) / scale;
  return Pose(Eigen::Quaterniond(r), t);
}

Pose homography_init(const std::vector<Correspondence>& pairs,
                     const std::vector<Point2>& obs, const PointShape& shape) {
  const size_t n = pairs.size();
  // Plane coordinates q = B^T (p - C), with q.z ~ 0.
  Eigen::MatrixXd m(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    Eigen::Vector3d q = shape.axes.transpose() * (pairs[i].point - shape.centroid);
    double u = q.x(), v = q.y();
    double x = obs[i].x(), y = obs[i].y();
    m.row(Eigen::Index(2 * i)) << u, v, 1, 0, 0, 0, -x * u, -x * v, -x;
    m.row(Eigen::Index(2 * i + 1)) << 0, 0, 0, u, v, 1, -y * u, -y * v, -y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> hv = svd.matrixV().col(8);
  Eigen::Matrix3d h;
  h << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  // Column 3 is the camera-frame position of the plane centroid; it must
  // sit in front of the camera.
  if (h(2, 2) < 0) h = -h;

  double lambda = (h.col(0).norm() + h.col(1).norm()) / 2.0;
  if (lambda < 1e-12)
    throw CalibError(Errc::DegenerateConfiguration, "homography is rank deficient");
  Eigen::Matrix3d mrot;
  mrot.col(0) = h.col(0) / lambda;
  mrot.col(1) = h.col(1) / lambda;
  mrot.col(2) = mrot.col(0).cross(mrot.col(1));
  Eigen::JacobiSVD<Eigen::Matrix3d> psvd(mrot, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d mhat = psvd.matrixU() * psvd.matrixV().transpose();

  Eigen::Matrix3d r = mhat * shape.axes.transpose();
  Eigen::Vector3d t = h.col(2) / lambda - r * shape.centroid;
  return Pose(Eigen::Quaterniond(r), t);
}

// The 24 proper rotations with axis-aligned columns; a coarse orientation
// bank for small general-position sets that neither DLT nor the homography
// route covers.
std::vector<Eigen::Matrix3d> orientation_bank() {
  std::vector<Eigen::Matrix3d> out;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& perm : perms) {
    for (int signs = 0; signs < 8; ++signs) {
      Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
      for (int c = 0; c < 3; ++c)
        r(perm[c], c) = (signs >> c) & 1 ? -1.0 : 1.0;
      if (r.determinant() > 0) out.push_back(r);
    }
  }
  return out;
}

struct LmResult {
  Pose pose;
  double cost = 0;
  Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
  bool converged = false;
};

LmResult levenberg_marquardt(const CorrespondenceSet& corrs, Pose pose) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd r = pnp_residuals(corrs, pose, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  LmResult res;

  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = jac.transpose() * jac;
    Eigen::Matrix<double, 6, 1> jtr = jac.transpose() * r;
    Eigen::Matrix<double, 6, 6> damped = jtj;
    for (int k = 0; k < 6; ++k)
      damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
    Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-jtr);

    Pose trial = apply_increment(pose, delta);
    double trial_cost = points_in_front(corrs.pairs, trial)
                            ? cost_at(corrs, trial)
                            : std::numeric_limits<double>::infinity();
    if (trial_cost < cost) {
      double rel = (cost - trial_cost) / std::max(cost, 1e-300);
      pose = trial;
      cost = trial_cost;
      r = pnp_residuals(corrs, pose, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (rel < 1e-10 || cost < 1e-20) {
        res.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      // Heavy damping shrinks steps toward pure tiny gradient descent; if
      // even those cannot reduce the cost, this is a numerical minimum.
      if (lambda > 1e12) {
        res.converged = true;
        break;
      }
    }
  }
  res.pose = pose;
  res.cost = cost;
  res.jtj = jac.transpose() * jac;
  return res;
}

}  // namespace

Eigen::VectorXd pnp_residuals(const CorrespondenceSet& corrs, const Pose& pose,
                              Eigen::MatrixXd* jacobian) {
  const size_t n = corrs.pairs.size();
  const double fx = corrs.camera.fx, fy = corrs.camera.fy;
  Eigen::VectorXd r(2 * n);
  if (jacobian) jacobian->setZero(Eigen::Index(2 * n), 6);

  for (size_t i = 0; i < n; ++i) {
    Point2 xn = undistort_normalized(corrs.pairs[i].pixel, corrs.camera);
    Eigen::Vector3d rp = pose.rotation * corrs.pairs[i].point;
    Eigen::Vector3d q = rp + pose.translation;
    if (q.z() <= 1e-9)
      throw CalibError(Errc::BehindCamera,
                       "point " + corrs.pairs[i].label + " behind camera");
    r(Eigen::Index(2 * i)) = fx * (q.x() / q.z() - xn.x());
    r(Eigen::Index(2 * i + 1)) = fy * (q.y() / q.z() - xn.y());
    if (jacobian) {
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << fx / q.z(), 0, -fx * q.x() / (q.z() * q.z()), 0, fy / q.z(),
          -fy * q.y() / (q.z() * q.z());
      Eigen::Matrix<double, 3, 6> dq;
      dq.leftCols<3>() = -skew(rp);
      dq.rightCols<3>() = Eigen::Matrix3d::Identity();
      jacobian->block<2, 6>(Eigen::Index(2 * i), 0) = dproj * dq;
    }
  }
  return r;
}

Extrinsics solve_pnp(const CorrespondenceSet& corrs) {
  const size_t n = corrs.pairs.size();
  if (n < 4)
    throw CalibError(Errc::TooFewPoints,
                     "PnP needs at least 4 correspondences, got " + std::to_string(n));
  std::set<std::string> labels;
  for (const Correspondence& c : corrs.pairs) {
    if (!labels.insert(c.label).second)
      throw CalibError(Errc::InvariantViolation, "duplicate label " + c.label);
    if (!c.point.allFinite() || !c.pixel.allFinite())
      throw CalibError(Errc::InvariantViolation, "non-finite correspondence " + c.label);
  }
  corrs.camera.validate();

  PointShape shape = analyze_points(corrs.pairs);
  double spread = shape.singular_values(0);
  if (spread <= 0 || shape.singular_values(1) <= 1e-9 * spread)
    throw CalibError(Errc::DegenerateConfiguration, "3D points are collinear");
  bool coplanar = shape.singular_values(2) <= 1e-6 * spread;

  std::vector<Point2> obs = normalized_observations(corrs);

  std::vector<Pose> inits;
  if (coplanar) {
    inits.push_back(homography_init(corrs.pairs, obs, shape));
  } else if (n >= 6) {
    inits.push_back(dlt_init(corrs.pairs, obs));
  } else {
    for (const Eigen::Matrix3d& r : orientation_bank()) {
      Pose cand = translation_for_rotation(r, corrs.pairs, obs);
      if (points_in_front(corrs.pairs, cand)) inits.push_back(cand);
    }
    if (inits.empty())
      throw CalibError(Errc::DegenerateConfiguration,
                       "no orientation places all points in front of the camera");
  }

  const LmResult* best = nullptr;
  std::vector<LmResult> results;
  results.reserve(inits.size());
  for (const Pose& init : inits) {
    if (!points_in_front(corrs.pairs, init)) continue;
    results.push_back(levenberg_marquardt(corrs, init));
    if (!best || results.back().cost < best->cost) best = &results.back();
  }
  if (!best || !best->converged)
    throw CalibError(Errc::NoConvergence, "PnP refinement did not converge");

  Extrinsics ext;
  ext.pose = best->pose;
  if (2 * n > 6) {
    double sigma2 = best->cost / double(2 * n - 6);
    Eigen::Matrix<double, 6, 6> info = best->jtj;
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(info);
    if (lu.isInvertible()) {
      Eigen::Matrix<double, 6, 6> cov = sigma2 * lu.inverse();
      ext.covariance = (cov + cov.transpose()) / 2.0;
    }
  }
  return ext;
}

ReprojectionStats reprojection_stats(const CorrespondenceSet& corrs,
                                     const Extrinsics& ext) {
  ReprojectionStats stats;
  for (const Correspondence& c : corrs.pairs) {
    Point2 predicted;
    try {
      predicted = project(c.point, ext.pose, corrs.camera);
    } catch (const CalibError& e) {
      if (e.code() == Errc::BehindCamera)
        throw CalibError(Errc::BehindCamera, "point " + c.label + " behind camera");
      throw;
    }
    double err = (predicted - c.pixel).norm();
    stats.per_point.push_back({c.label, err});
    stats.mean += err;
    stats.max = std::max(stats.max, err);
  }
  stats.n = int(corrs.pairs.size());
  if (stats.n > 0) stats.mean /= stats.n;
  return stats;
}

std::pair<Extrinsics, ReprojectionStats> calibrate_event_lidar(
    const std::array<Point3, kNumLeds>& corners3d,
    const std::vector<LedKeypoint>& keypoints, const CameraIntrinsics& K) {
  CorrespondenceSet corrs;
  corrs.camera = K;
  std::vector<LedKeypoint> sorted = keypoints;
  std::sort(sorted.begin(), sorted.end(),
            [](const LedKeypoint& a, const LedKeypoint& b) {
              return a.corner_index < b.corner_index;
            });
  for (const LedKeypoint& kp : sorted) {
    if (kp.corner_index < 0 || kp.corner_index >= kNumLeds)
      throw CalibError(Errc::InvariantViolation,
                       "LED corner index " + std::to_string(kp.corner_index) +
                           " out of range");
    corrs.pairs.push_back({corners3d[size_t(kp.corner_index)], kp.center,
                           "E_" + std::to_string(kp.corner_index)});
  }
  Extrinsics ext = solve_pnp(corrs);
  ext.source_sensor = "lidar";
  ext.target_sensor = "event";
  return {ext, reprojection_stats(corrs, ext)};
}

std::pair<Extrinsics, ReprojectionStats> calibrate_rgb_lidar(
    const std::array<Point3, kNumMarkerCorners>& aruco3d,
    const std::vector<std::pair<int, Point2>>& detections,
    const CameraIntrinsics& K) {
  CorrespondenceSet corrs;
  corrs.camera = K;
  std::vector<std::pair<int, Point2>> sorted = detections;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [index, px] : sorted) {
    if (index < 0 || index >= kNumMarkerCorners)
      throw CalibError(Errc::InvariantViolation,
                       "marker corner index " + std::to_string(index) + " out of range");
    corrs.pairs.push_back({aruco3d[size_t(index)], px, "A_" + std::to_string(index)});
  }
  Extrinsics ext = solve_pnp(corrs);
  ext.source_sensor = "lidar";
  ext.target_sensor = "rgb";
  return {ext, reprojection_stats(corrs, ext)};
}

std::map<std::string, double> aggregate_by_type(
    const std::vector<std::pair<std::string, ReprojectionStats>>& entries) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& [kind, stats] : entries) {
    acc[kind].first += stats.mean;
    acc[kind].second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [kind, sum_count] : acc)
    out[kind] = sum_count.first / sum_count.second;
  return out;
}

void save_extrinsics(const SavedCalibration& calib, const std::string& path) {
  const Eigen::Quaterniond& q = calib.ext.pose.rotation;
  Eigen::Matrix3d r = calib.ext.pose.rotation_matrix();
  nlohmann::json doc;
  doc["source"] = calib.ext.source_sensor;
  doc["target"] = calib.ext.target_sensor;
  doc["rotation_quaternion_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
  doc["rotation_matrix_row_major"] = {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1),
                                      r(1, 2), r(2, 0), r(2, 1), r(2, 2)};
  doc["translation_m"] = {calib.ext.pose.translation.x(),
                          calib.ext.pose.translation.y(),
                          calib.ext.pose.translation.z()};
  nlohmann::json rep;
  rep["mean_px"] = calib.stats.mean;
  rep["max_px"] = calib.stats.max;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [label, px] : calib.stats.per_point)
    per.push_back({{"label", label}, {"px", px}});
  rep["per_point"] = per;
  doc["reprojection"] = rep;
  doc["config_digest"] = calib.config_digest;
  doc["seed"] = calib.seed;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

SavedCalibration load_extrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CalibError(Errc::ParseError, path + ": " + e.what());
  }
  SavedCalibration calib;
  try {
    calib.ext.source_sensor = doc.at("source").get<std::string>();
    calib.ext.target_sensor = doc.at("target").get<std::string>();
    auto qv = doc.at("rotation_quaternion_wxyz");
    Eigen::Quaterniond q(qv.at(0).get<double>(), qv.at(1).get<double>(),
                         qv.at(2).get<double>(), qv.at(3).get<double>());
    if (std::abs(q.norm() - 1.0) > 1e-6)
      throw CalibError(Errc::ParseError, path + ": quaternion is not unit length");
    auto tv = doc.at("translation_m");
    calib.ext.pose = Pose(q, Eigen::Vector3d(tv.at(0).get<double>(),
                                             tv.at(1).get<double>(),
                                             tv.at(2).get<double>()));
    const auto& rep = doc.at("reprojection");
    calib.stats.mean = rep.at("mean_px").get<double>();
    calib.stats.max = rep.at("max_px").get<double>();
    for (const auto& entry : rep.at("per_point"))
      calib.stats.per_point.push_back(
          {entry.at("label").get<std::string>(), entry.at("px").get<double>()});
    calib.stats.n = int(calib.stats.per_point.size());
    calib.config_digest = doc.at("config_digest").get<std::string>();
    calib.seed = doc.at("seed").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CalibError(Errc::ParseError, path + ": " + e.what());
  }
  return calib;
}

}  // namespace calibcube
