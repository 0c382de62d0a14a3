#ifndef CALIBCUBE_GEOMETRY_HPP
#define CALIBCUBE_GEOMETRY_HPP

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <iosfwd>
#include <string>

#include "calibcube/error.hpp"

namespace calibcube {

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;

/// Rigid transform: X_out = R * X_in + t. Rotation kept as a unit quaternion;
/// matrices are derived on demand.
struct Pose {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  Pose() = default;
  Pose(const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
      : rotation(q.normalized()), translation(t) {}

  static Pose identity() { return Pose(); }
  static Pose from_matrix(const Eigen::Matrix4d& T) {
    return Pose(Eigen::Quaterniond(Eigen::Matrix3d(T.block<3, 3>(0, 0))),
                T.block<3, 1>(0, 3));
  }
  /// Rotation of `angle` radians about `axis`, then translation.
  static Pose from_axis_angle(const Eigen::Vector3d& axis, double angle,
                              const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return Pose(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())), t);
  }

  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 3>(0, 0) = rotation_matrix();
    T.block<3, 1>(0, 3) = translation;
    return T;
  }

  Point3 operator*(const Point3& p) const { return rotation * p + translation; }
};

Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);

/// Angle in radians between the two rotations (geodesic distance on SO(3)).
double geodesic_angle(const Pose& a, const Pose& b);

/// Pinhole camera with 5-coefficient Brown-Conrady distortion
/// (k1, k2, p1, p2, k3).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 5> dist{0.0, 0.0, 0.0, 0.0, 0.0};
  int width = 0;
  int height = 0;

  void validate() const;
  bool has_distortion() const;
  Point2 pixel_to_normalized(const Point2& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy};
  }
  Point2 normalized_to_pixel(const Point2& xn) const {
    return {fx * xn.x() + cx, fy * xn.y() + cy};
  }
};

/// Plane n . x = offset with |n| = 1.
struct Plane {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double offset = 0.0;

  Plane() = default;
  Plane(const Eigen::Vector3d& n, double d);

  double signed_distance(const Point3& p) const { return normal.dot(p) - offset; }
};

/// Apply Brown-Conrady distortion to normalized image coordinates.
Point2 distort_normalized(const Point2& xn, const CameraIntrinsics& K);

/// Project a 3D point through pose then intrinsics (with distortion).
/// Throws BehindCamera when the transformed point has z <= 1e-9.
Point2 project(const Point3& X, const Pose& pose, const CameraIntrinsics& K);

/// Invert the distortion model by fixed-point iteration and return ideal
/// (undistorted) normalized coordinates for a measured pixel.
/// Throws NoConvergence when 50 iterations do not reach 1e-9.
Point2 undistort_normalized(const Point2& px, const CameraIntrinsics& K);

/// Same inversion, mapped back to pixel coordinates: re-distorting the result
/// reproduces the input pixel.
Point2 undistort(const Point2& px, const CameraIntrinsics& K);

/// Load intrinsics from TOML (keys fx, fy, cx, cy, dist = [k1,k2,p1,p2,k3],
/// width, height).
CameraIntrinsics load_intrinsics(const std::string& path);

namespace toml {
class Value;
}
/// Same schema as load_intrinsics, read from an already-parsed table.
CameraIntrinsics intrinsics_from_toml(const toml::Value& table);
/// Emit the load_intrinsics schema as bare keys.
void write_intrinsics_toml(std::ostream& out, const CameraIntrinsics& K);
void save_intrinsics(const CameraIntrinsics& K, const std::string& path);

}  // namespace calibcube

#endif  // CALIBCUBE_GEOMETRY_HPP
