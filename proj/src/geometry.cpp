#include "calibcube/geometry.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "calibcube/numfmt.hpp"
#include "calibcube/toml.hpp"

namespace calibcube {

Pose compose(const Pose& a, const Pose& b) {
  return Pose((a.rotation * b.rotation).normalized(),
              a.rotation * b.translation + a.translation);
}

Pose invert(const Pose& p) {
  Eigen::Quaterniond q = p.rotation.conjugate();
  return Pose(q, -(q * p.translation));
}

double geodesic_angle(const Pose& a, const Pose& b) {
  double d = std::abs(a.rotation.normalized().dot(b.rotation.normalized()));
  d = std::min(d, 1.0);
  return 2.0 * std::acos(d);
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw CalibError(Errc::ConfigError, "focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw CalibError(Errc::ConfigError, "sensor size must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw CalibError(Errc::ConfigError, "principal point outside sensor");
}

bool CameraIntrinsics::has_distortion() const {
  for (double d : dist)
    if (d != 0.0) return true;
  return false;
}

Plane::Plane(const Eigen::Vector3d& n, double d) : normal(n), offset(d) {
  double len = normal.norm();
  if (len < 1e-12)
    throw CalibError(Errc::DegenerateConfiguration, "plane normal has zero length");
  normal /= len;
  offset /= len;
}

Point2 distort_normalized(const Point2& xn, const CameraIntrinsics& K) {
  const double x = xn.x(), y = xn.y();
  const double k1 = K.dist[0], k2 = K.dist[1], p1 = K.dist[2], p2 = K.dist[3],
               k3 = K.dist[4];
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
  return {xd, yd};
}

Point2 project(const Point3& X, const Pose& pose, const CameraIntrinsics& K) {
  Point3 Xc = pose * X;
  if (Xc.z() <= 1e-9)
    throw CalibError(Errc::BehindCamera, "point has non-positive depth");
  Point2 xn(Xc.x() / Xc.z(), Xc.y() / Xc.z());
  return K.normalized_to_pixel(distort_normalized(xn, K));
}

Point2 undistort_normalized(const Point2& px, const CameraIntrinsics& K) {
  if (!px.allFinite())
    throw CalibError(Errc::InvariantViolation, "non-finite pixel");
  const Point2 xd = K.pixel_to_normalized(px);
  if (!K.has_distortion()) return xd;

  const double k1 = K.dist[0], k2 = K.dist[1], p1 = K.dist[2], p2 = K.dist[3],
               k3 = K.dist[4];
  double x = xd.x(), y = xd.y();
  for (int iter = 0; iter < 50; ++iter) {
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    const double dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
    const double dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    const double x_next = (xd.x() - dx) / radial;
    const double y_next = (xd.y() - dy) / radial;
    const double step = std::abs(x_next - x) + std::abs(y_next - y);
    x = x_next;
    y = y_next;
    if (step < 1e-9) return {x, y};
  }
  throw CalibError(Errc::NoConvergence, "undistortion did not converge in 50 iterations");
}

Point2 undistort(const Point2& px, const CameraIntrinsics& K) {
  return K.normalized_to_pixel(undistort_normalized(px, K));
}

CameraIntrinsics intrinsics_from_toml(const toml::Value& table) {
  CameraIntrinsics K;
  K.fx = table.get_double("fx");
  K.fy = table.get_double("fy");
  K.cx = table.get_double("cx");
  K.cy = table.get_double("cy");
  K.width = static_cast<int>(table.get_int("width"));
  K.height = static_cast<int>(table.get_int("height"));
  std::vector<double> d = table.get_double_array("dist");
  if (d.size() != 5)
    throw CalibError(Errc::ConfigError, "dist must have 5 coefficients");
  for (size_t i = 0; i < 5; ++i) K.dist[i] = d[i];
  K.validate();
  return K;
}

CameraIntrinsics load_intrinsics(const std::string& path) {
  return intrinsics_from_toml(toml::parse_file(path));
}

void write_intrinsics_toml(std::ostream& out, const CameraIntrinsics& K) {
  out << "fx = " << fmt_double(K.fx) << "\n";
  out << "fy = " << fmt_double(K.fy) << "\n";
  out << "cx = " << fmt_double(K.cx) << "\n";
  out << "cy = " << fmt_double(K.cy) << "\n";
  out << "width = " << K.width << "\n";
  out << "height = " << K.height << "\n";
  out << "dist = [";
  for (size_t i = 0; i < 5; ++i) out << (i ? ", " : "") << fmt_double(K.dist[i]);
  out << "]\n";
}

void save_intrinsics(const CameraIntrinsics& K, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write '" + path + "'");
  write_intrinsics_toml(out, K);
  if (!out) throw CalibError(Errc::IoError, "failed writing '" + path + "'");
}

}  // namespace calibcube
