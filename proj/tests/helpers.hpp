#ifndef CALIBCUBE_TESTS_HELPERS_HPP
#define CALIBCUBE_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>

#include "calibcube/geometry.hpp"
#include "calibcube/rng.hpp"

namespace calibcube::test {

/// Quaternion-to-matrix by the explicit component formula, kept independent
/// of the library's conversion path so matrix-based oracles do not share code
/// with what they check.
inline Eigen::Matrix3d quat_to_matrix_oracle(double w, double x, double y, double z) {
  Eigen::Matrix3d R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

inline Eigen::Matrix4d pose_matrix_oracle(const Pose& p) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  const auto& q = p.rotation;
  T.block<3, 3>(0, 0) = quat_to_matrix_oracle(q.w(), q.x(), q.y(), q.z());
  T.block<3, 1>(0, 3) = p.translation;
  return T;
}

inline Pose random_pose(Rng& rng, double translation_scale = 2.0) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  Eigen::Vector3d t(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0));
  return Pose(q, translation_scale * t);
}

/// Scratch directory unique to a test, removed when the helper dies.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("calibcube_test_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace calibcube::test

#endif  // CALIBCUBE_TESTS_HELPERS_HPP
