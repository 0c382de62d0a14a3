#include "calibcube/lidar_detector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "calibcube/error.hpp"
#include "calibcube/rng.hpp"

namespace calibcube {

void RansacParams::validate() const {
  if (!(inlier_threshold > 0))
    throw CalibError(Errc::ConfigError, "inlier_threshold must be positive");
  if (max_iterations < 1)
    throw CalibError(Errc::ConfigError, "max_iterations must be at least 1");
  if (min_inliers < 3)
    throw CalibError(Errc::ConfigError, "min_inliers must be at least 3");
}

namespace {

Plane fit_plane_ls(const PointCloud& cloud, const std::vector<int>& indices) {
  Point3 centroid = Point3::Zero();
  for (int i : indices) centroid += cloud.points[size_t(i)];
  centroid /= double(indices.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int i : indices) {
    Point3 d = cloud.points[size_t(i)] - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  Point3 n = eig.eigenvectors().col(0);  // smallest eigenvalue
  return Plane(n, n.dot(centroid));
}

std::vector<int> collect_inliers(const PointCloud& cloud, const std::vector<int>& pool,
                                 const Plane& plane, double threshold) {
  std::vector<int> inliers;
  for (int i : pool)
    if (std::abs(plane.signed_distance(cloud.points[size_t(i)])) <= threshold)
      inliers.push_back(i);
  return inliers;
}

}  // namespace

PlaneSet sequential_ransac_planes(const PointCloud& cloud, const RansacParams& params) {
  params.validate();
  PlaneSet result;
  std::vector<int> pool(cloud.points.size());
  for (size_t i = 0; i < pool.size(); ++i) pool[i] = int(i);

  for (int round = 0; round < 3; ++round) {
    if (pool.size() < 3)
      throw CalibError(Errc::InsufficientInliers,
                       "round " + std::to_string(round) + ": only " +
                           std::to_string(pool.size()) + " points left");

    int best_count = -1;
    Plane best_plane;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      Rng rng = Rng::fork(params.seed, uint64_t(round), uint64_t(iter));
      uint64_t i0 = rng.uniform_int(pool.size());
      uint64_t i1;
      do i1 = rng.uniform_int(pool.size());
      while (i1 == i0);
      uint64_t i2;
      do i2 = rng.uniform_int(pool.size());
      while (i2 == i0 || i2 == i1);
      const Point3& p0 = cloud.points[size_t(pool[i0])];
      Point3 n = (cloud.points[size_t(pool[i1])] - p0)
                     .cross(cloud.points[size_t(pool[i2])] - p0);
      double len = n.norm();
      if (len < 1e-12) continue;
      Plane candidate(n / len, (n / len).dot(p0));
      int count = 0;
      for (int i : pool)
        if (std::abs(candidate.signed_distance(cloud.points[size_t(i)])) <=
            params.inlier_threshold)
          ++count;
      if (count > best_count) {  // strict: earliest iteration wins ties
        best_count = count;
        best_plane = candidate;
      }
    }
    if (best_count < params.min_inliers)
      throw CalibError(Errc::InsufficientInliers,
                       "round " + std::to_string(round) + ": best sample explains " +
                           std::to_string(std::max(best_count, 0)) + " points, need " +
                           std::to_string(params.min_inliers));

    // Two refine/recollect passes; the final set is collected against the
    // final plane so every reported inlier meets the threshold.
    std::vector<int> inliers = collect_inliers(cloud, pool, best_plane, params.inlier_threshold);
    Plane refined = fit_plane_ls(cloud, inliers);
    inliers = collect_inliers(cloud, pool, refined, params.inlier_threshold);
    refined = fit_plane_ls(cloud, inliers);
    inliers = collect_inliers(cloud, pool, refined, params.inlier_threshold);
    if (int(inliers.size()) < params.min_inliers)
      throw CalibError(Errc::InsufficientInliers,
                       "round " + std::to_string(round) + ": refinement kept " +
                           std::to_string(inliers.size()) + " inliers, need " +
                           std::to_string(params.min_inliers));

    result.planes[size_t(round)] = refined;
    result.inliers[size_t(round)] = inliers;
    std::vector<int> next_pool;
    next_pool.reserve(pool.size() - inliers.size());
    std::set_difference(pool.begin(), pool.end(), inliers.begin(), inliers.end(),
                        std::back_inserter(next_pool));
    pool = std::move(next_pool);
  }
  return result;
}

LabeledPlanes orthogonalize_and_label(const std::array<Plane, 3>& planes,
                                      const PointCloud& cloud,
                                      const std::array<std::vector<int>, 3>& inliers) {
  // Orient every normal toward the sensor at the origin.
  std::array<Plane, 3> oriented = planes;
  for (Plane& p : oriented) {
    if (p.offset > 0) {
      p.normal = -p.normal;
      p.offset = -p.offset;
    }
  }

  constexpr double kMaxSkewDeg = 5.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      double angle =
          std::acos(std::clamp(oriented[size_t(a)].normal.dot(oriented[size_t(b)].normal),
                               -1.0, 1.0)) *
          180.0 / M_PI;
      if (std::abs(angle - 90.0) > kMaxSkewDeg)
        throw CalibError(Errc::NotOrthogonal,
                         "planes " + std::to_string(a) + " and " + std::to_string(b) +
                             " meet at " + std::to_string(angle) + " degrees");
    }
  }

  // Nearest orthonormal frame to the three normals.
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) m.col(i) = oriented[size_t(i)].normal;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d q = svd.matrixU() * svd.matrixV().transpose();

  std::array<Plane, 3> snapped;
  for (int i = 0; i < 3; ++i) {
    Point3 n = q.col(i);
    double d;
    if (inliers[size_t(i)].empty()) {
      d = oriented[size_t(i)].offset;  // nothing to re-fit against
    } else {
      d = 0;
      for (int idx : inliers[size_t(i)]) d += n.dot(cloud.points[size_t(idx)]);
      d /= double(inliers[size_t(i)].size());
    }
    snapped[size_t(i)] = Plane(n, d);
  }

  int top = 0;
  for (int i = 1; i < 3; ++i)
    if (snapped[size_t(i)].normal.z() > snapped[size_t(top)].normal.z()) top = i;
  int a = (top + 1) % 3, b = (top + 2) % 3;
  // The visible-face normals of a cube corner form a left-handed triple in
  // (left, right, top) order; pick the (a,b) order that satisfies it.
  double orientation = snapped[size_t(a)].normal.cross(snapped[size_t(b)].normal)
                           .dot(snapped[size_t(top)].normal);
  int left = orientation < 0 ? a : b;
  int right = orientation < 0 ? b : a;

  LabeledPlanes out;
  out.planes[size_t(Face::X)] = snapped[size_t(left)];
  out.planes[size_t(Face::Y)] = snapped[size_t(right)];
  out.planes[size_t(Face::Z)] = snapped[size_t(top)];
  out.source = {left, right, top};
  return out;
}

LabeledPlanes refine_face_planes(const PointCloud& cloud, const LabeledPlanes& labeled,
                                 std::array<std::vector<int>, 3>& inliers,
                                 const RansacParams& params) {
  params.validate();
  LabeledPlanes current = labeled;
  for (int pass = 0; pass < 2; ++pass) {
    std::array<std::vector<int>, 3> assign;
    for (int i = 0; i < int(cloud.points.size()); ++i) {
      const Point3& p = cloud.points[size_t(i)];
      std::array<double, 3> d;
      for (int f = 0; f < 3; ++f)
        d[size_t(f)] = std::abs(current.planes[size_t(f)].signed_distance(p));
      int nearest = 0;
      for (int f = 1; f < 3; ++f)
        if (d[size_t(f)] < d[size_t(nearest)]) nearest = f;
      if (d[size_t(nearest)] > params.inlier_threshold) continue;
      bool ambiguous = false;
      for (int f = 0; f < 3; ++f)
        if (f != nearest && d[size_t(f)] <= params.inlier_threshold) ambiguous = true;
      if (!ambiguous) assign[size_t(nearest)].push_back(i);
    }
    for (const std::vector<int>& a : assign)
      if (int(a.size()) < params.min_inliers) return current;

    std::array<Plane, 3> fitted;
    for (int f = 0; f < 3; ++f)
      fitted[size_t(f)] = fit_plane_ls(cloud, assign[size_t(f)]);
    LabeledPlanes next = orthogonalize_and_label(fitted, cloud, assign);
    // Labeling starts from scratch, so compose the mappings: the sets follow
    // their faces and source keeps naming the extraction rounds.
    std::array<std::vector<int>, 3> reordered;
    std::array<int, 3> src;
    for (int f = 0; f < 3; ++f) {
      reordered[size_t(f)] = std::move(assign[size_t(next.source[size_t(f)])]);
      src[size_t(f)] = current.source[size_t(next.source[size_t(f)])];
    }
    next.source = src;
    inliers = std::move(reordered);
    current = next;
  }
  return current;
}

Point3 intersect_three_planes(const std::array<Plane, 3>& planes) {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int i = 0; i < 3; ++i) {
    a.row(i) = planes[size_t(i)].normal;
    b[i] = planes[size_t(i)].offset;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  double smin = svd.singularValues()(2);
  if (smin <= 0 || svd.singularValues()(0) / smin >= 1e6)
    throw CalibError(Errc::IllConditioned, "plane normals are close to dependent");
  return svd.solve(b);
}

CubeDetection derive_target_points(const LabeledPlanes& labeled, const Point3& e0,
                                   const TargetGeometry& geometry) {
  // Target axes point into the cube: the opposite of the visible-face
  // normals, taken in face order.
  Eigen::Matrix3d r;
  for (int f = 0; f < 3; ++f) r.col(f) = -labeled.planes[size_t(f)].normal;
  if (r.determinant() < 0)
    throw CalibError(Errc::InvariantViolation, "face labeling produced a reflection");

  CubeDetection det;
  det.planes = labeled.planes;
  det.face_assignment = labeled.source;
  det.pose = Pose(Eigen::Quaterniond(r), e0);
  for (int i = 0; i < kNumLeds; ++i)
    det.corners[size_t(i)] = det.pose * geometry.corners[size_t(i)];
  for (int i = 0; i < kNumMarkerCorners; ++i)
    det.aruco_corners[size_t(i)] = det.pose * geometry.aruco_corners[size_t(i)];
  return det;
}

CubeDetection detect_cube(const PointCloud& cloud, const RansacParams& params,
                          const TargetGeometry& geometry) {
  PlaneSet set = sequential_ransac_planes(cloud, params);
  LabeledPlanes labeled = orthogonalize_and_label(set.planes, cloud, set.inliers);
  std::array<std::vector<int>, 3> face_inliers;
  for (int f = 0; f < 3; ++f)
    face_inliers[size_t(f)] = set.inliers[size_t(labeled.source[size_t(f)])];
  labeled = refine_face_planes(cloud, labeled, face_inliers, params);
  Point3 e0 = intersect_three_planes(labeled.planes);
  return derive_target_points(labeled, e0, geometry);
}

}  // namespace calibcube
