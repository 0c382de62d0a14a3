#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "calibcube/pointcloud.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

struct RansacParams {
  double inlier_threshold = 0.01;  // meters
  int max_iterations = 1000;
  int min_inliers = 100;
  uint64_t seed = 0;

  void validate() const;
};

// Output of the three RANSAC rounds, in extraction order.
struct PlaneSet {
  std::array<Plane, 3> planes;
  std::array<std::vector<int>, 3> inliers;  // indices into the input cloud
};

// Planes reordered to the face convention and snapped to mutual
// orthogonality. source[f] is the extraction-order index that became face f.
struct LabeledPlanes {
  std::array<Plane, 3> planes;  // indexed by Face
  std::array<int, 3> source;
};

struct CubeDetection {
  std::array<Plane, 3> planes;            // indexed by Face
  std::array<int, 3> face_assignment;     // extraction index per face
  std::array<Point3, kNumLeds> corners;   // E_0..E_6, sensor frame
  std::array<Point3, kNumMarkerCorners> aruco_corners;  // A_0..A_59
  Pose pose;                              // target frame -> sensor frame
};

// Three rounds of plane RANSAC; each round removes its inliers from the
// pool. Winner per round is (inlier count, earliest iteration); each
// iteration draws from its own seed-derived RNG stream, so results are
// reproducible regardless of evaluation order. Planes are refined twice on
// their collected inliers, and the final inlier sets are collected against
// the final planes. Throws InsufficientInliers naming the failing round.
PlaneSet sequential_ransac_planes(const PointCloud& cloud, const RansacParams& params);

// Flips normals toward the sensor (origin), snaps the three normals to the
// nearest orthonormal frame (polar decomposition), re-fits offsets on the
// inliers, and labels faces: the most upward normal becomes the top face
// (Face::Z); the other two are ordered so the triple keeps the left-handed
// orientation the cube's visible faces have. Throws NotOrthogonal when any
// pair of input normals deviates from 90 degrees by more than 5.
LabeledPlanes orthogonalize_and_label(const std::array<Plane, 3>& planes,
                                      const PointCloud& cloud,
                                      const std::array<std::vector<int>, 3>& inliers);

// Two joint reassignment passes over the labeled planes: every cloud point
// within threshold of exactly one plane re-fits that plane; points within
// threshold of a second plane as well sit on a cube edge and could belong
// to either face, so they are dropped. The sequential rounds instead claim
// the neighbors' edge strips, which lie entirely on one side of the winning
// plane and tilt each fit by several millirad at centimeter noise.
// `inliers` holds the per-face index sets (indexed by Face) and is updated
// alongside the planes; a pass that would leave any face below
// params.min_inliers keeps the incoming planes and sets instead. The
// returned source still refers to the original extraction rounds.
LabeledPlanes refine_face_planes(const PointCloud& cloud, const LabeledPlanes& labeled,
                                 std::array<std::vector<int>, 3>& inliers,
                                 const RansacParams& params);

// Unique intersection point of three planes. Throws IllConditioned when the
// normal matrix condition number reaches 1e6.
Point3 intersect_three_planes(const std::array<Plane, 3>& planes);

// Places every target point in the sensor frame: the pose takes the target
// origin to E0 and the target axes to the inward face normals.
CubeDetection derive_target_points(const LabeledPlanes& labeled, const Point3& e0,
                                   const TargetGeometry& geometry);

// Full chain: RANSAC, orthogonalize, intersect, derive.
CubeDetection detect_cube(const PointCloud& cloud, const RansacParams& params,
                          const TargetGeometry& geometry);

}  // namespace calibcube
