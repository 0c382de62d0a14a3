#include <doctest.h>

#include <Eigen/Dense>

#include "calibcube/geometry.hpp"
#include "calibcube/rng.hpp"
#include "helpers.hpp"

using namespace calibcube;
using calibcube::test::pose_matrix_oracle;
using calibcube::test::random_pose;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("compose identity cases") {
  Pose id = Pose::identity();
  Pose c = compose(id, id);
  CHECK(c.translation.norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(geodesic_angle(c, id) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    Pose p = random_pose(rng);
    Pose round = compose(p, invert(p));
    CHECK(round.translation.norm() < 1e-9);
    CHECK(geodesic_angle(round, id) < 1e-9);
  }
}

TEST_CASE("compose matches homogeneous matrix product") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    Pose p = random_pose(rng);
    Pose q = random_pose(rng);
    Eigen::Matrix4d expected = pose_matrix_oracle(p) * pose_matrix_oracle(q);
    Eigen::Matrix4d got = compose(p, q).matrix();
    CHECK((expected - got).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("invert") {
  Pose id = Pose::identity();
  Pose inv_id = invert(id);
  CHECK(inv_id.translation.norm() == doctest::Approx(0.0));
  CHECK(geodesic_angle(inv_id, id) == doctest::Approx(0.0));

  Pose t(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1, 2, 3));
  Pose ti = invert(t);
  CHECK(ti.translation.isApprox(Eigen::Vector3d(-1, -2, -3), 1e-12));

  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    Pose p = random_pose(rng);
    Eigen::Matrix4d expected = pose_matrix_oracle(p).inverse();
    CHECK((expected - invert(p).matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pose round trip property") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    Pose p = random_pose(rng);
    Pose q = random_pose(rng);
    Pose r = compose(p, compose(q, invert(q)));
    CHECK((r.translation - p.translation).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(geodesic_angle(r, p) < 1e-9);
  }
}

TEST_CASE("rotation matrices are orthonormal") {
  Rng rng(19);
  for (int i = 0; i < 100; ++i) {
    Eigen::Matrix3d R = random_pose(rng).rotation_matrix();
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("project pinhole basics") {
  CameraIntrinsics K;
  K.fx = K.fy = 1.0;
  K.cx = K.cy = 0.0;
  K.width = K.height = 100;

  Point2 p = project(Point3(0, 0, 1), Pose::identity(), K);
  CHECK(p.x() == doctest::Approx(0.0));
  CHECK(p.y() == doctest::Approx(0.0));

  K.fx = K.fy = 100.0;
  K.cx = K.cy = 50.0;
  p = project(Point3(0.1, 0.2, 1.0), Pose::identity(), K);
  CHECK(p.x() == doctest::Approx(60.0));
  CHECK(p.y() == doctest::Approx(70.0));
}

TEST_CASE("project applies radial distortion") {
  // Hand-evaluated: x = 0.1, r^2 = 0.01, x' = x * (1 + k1 * r^2) = 0.1001.
  CameraIntrinsics K;
  K.fx = K.fy = 100.0;
  K.cx = K.cy = 50.0;
  K.width = K.height = 100;
  K.dist = {0.1, 0, 0, 0, 0};
  Point2 p = project(Point3(0.1, 0.0, 1.0), Pose::identity(), K);
  CHECK(p.x() == doctest::Approx(100.0 * 0.1001 + 50.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("project rejects points behind the camera") {
  CameraIntrinsics K;
  K.fx = K.fy = 100.0;
  K.cx = K.cy = 50.0;
  K.width = K.height = 100;
  CHECK_THROWS_AS(project(Point3(0, 0, -1), Pose::identity(), K), CalibError);
  try {
    project(Point3(0, 0, 0), Pose::identity(), K);
    FAIL("expected BehindCamera");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::BehindCamera);
  }
}

TEST_CASE("projection equivariance under composition") {
  CameraIntrinsics K;
  K.fx = 420.0;
  K.fy = 430.0;
  K.cx = 320.0;
  K.cy = 240.0;
  K.width = 640;
  K.height = 480;
  K.dist = {-0.1, 0.02, 0.001, -0.0005, 0.0};

  Rng rng(23);
  int checked = 0;
  while (checked < 50) {
    Pose a = random_pose(rng, 0.5);
    Pose b = random_pose(rng, 0.5);
    Point3 X(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(2, 6));
    Point3 Xb = b * X;
    if ((compose(a, b) * X).z() < 0.5) continue;
    Point2 lhs, rhs;
    try {
      lhs = project(X, compose(a, b), K);
      rhs = project(Xb, a, K);
    } catch (const CalibError&) {
      continue;
    }
    CHECK((lhs - rhs).norm() < 1e-9);
    ++checked;
  }
}

TEST_CASE("undistort with zero distortion is identity") {
  CameraIntrinsics K;
  K.fx = 500.0;
  K.fy = 510.0;
  K.cx = 320.0;
  K.cy = 240.0;
  K.width = 640;
  K.height = 480;
  Point2 p(123.25, 402.5);
  CHECK((undistort(p, K) - p).norm() < 1e-12);
}

TEST_CASE("distort then undistort round trip") {
  CameraIntrinsics K;
  K.fx = 500.0;
  K.fy = 500.0;
  K.cx = 320.0;
  K.cy = 240.0;
  K.width = 640;
  K.height = 480;
  K.dist = {-0.2, 0.05, 0.001, -0.002, 0.01};

  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    Point2 xn(rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4));
    Point2 measured = K.normalized_to_pixel(distort_normalized(xn, K));
    Point2 ideal = undistort(measured, K);
    // Re-distort the recovered ideal point; it must reproduce the input.
    Point2 again = K.normalized_to_pixel(
        distort_normalized(K.pixel_to_normalized(ideal), K));
    CHECK((again - measured).norm() < 1e-6);
    CHECK((K.pixel_to_normalized(ideal) - xn).norm() < 1e-9);
  }
}

TEST_CASE("undistort recovers the radial example preimage") {
  CameraIntrinsics K;
  K.fx = K.fy = 100.0;
  K.cx = K.cy = 50.0;
  K.width = K.height = 100;
  K.dist = {0.1, 0, 0, 0, 0};
  // Forward example: normalized (0.1, 0) distorts to pixel (60.01, 50).
  Point2 ideal = undistort(Point2(60.01, 50.0), K);
  CHECK(ideal.x() == doctest::Approx(60.0).epsilon(1e-9));
  CHECK(ideal.y() == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("undistort reports divergence") {
  CameraIntrinsics K;
  K.fx = K.fy = 1.0;
  K.cx = K.cy = 0.0;
  K.width = K.height = 10;
  K.dist = {-3.0, 0, 0, 0, 0};
  try {
    undistort(Point2(1.0, 0.0), K);
    FAIL("expected NoConvergence");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::NoConvergence);
  }
}

TEST_CASE("intrinsics load from TOML") {
  test::TempDir dir("intrinsics");
  test::write_text(dir.file("cam.toml"),
                   "fx = 500.0\nfy = 505.0\ncx = 320.0\ncy = 240.0\n"
                   "dist = [-0.1, 0.01, 0.0, 0.0, 0.001]\n"
                   "width = 640\nheight = 480\n");
  CameraIntrinsics K = load_intrinsics(dir.file("cam.toml"));
  CHECK(K.fx == doctest::Approx(500.0));
  CHECK(K.dist[4] == doctest::Approx(0.001));
  CHECK(K.height == 480);

  test::write_text(dir.file("bad.toml"),
                   "fx = -1.0\nfy = 505.0\ncx = 320.0\ncy = 240.0\n"
                   "dist = [0,0,0,0,0]\nwidth = 640\nheight = 480\n");
  CHECK_THROWS_AS(load_intrinsics(dir.file("bad.toml")), CalibError);
}

TEST_SUITE_END();
