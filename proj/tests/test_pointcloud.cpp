#include <doctest.h>

#include "calibcube/error.hpp"
#include "calibcube/pointcloud.hpp"
#include "helpers.hpp"

using namespace calibcube;

namespace {

PointCloud sample_cloud(bool with_intensity) {
  PointCloud c;
  c.points = {{0.5, -1.25, 3.0}, {1.0, 2.0, 3.5}, {-0.125, 0.0, 10.0}};
  if (with_intensity) c.intensity = {0.5f, 1.0f, 0.25f};
  return c;
}

bool same_points_f32(const PointCloud& a, const PointCloud& b) {
  if (a.points.size() != b.points.size()) return false;
  for (size_t i = 0; i < a.points.size(); ++i)
    for (int k = 0; k < 3; ++k)
      if (float(a.points[i][k]) != float(b.points[i][k])) return false;
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("pointcloud");

TEST_CASE("binary ply round trip") {
  test::TempDir dir("cloud");
  auto cloud = sample_cloud(true);
  write_cloud(cloud, dir.file("c.ply"));
  auto loaded = read_cloud(dir.file("c.ply"));
  CHECK(same_points_f32(loaded, cloud));
  CHECK(loaded.intensity == cloud.intensity);
}

TEST_CASE("ascii ply round trip") {
  test::TempDir dir("cloud");
  auto cloud = sample_cloud(false);
  write_cloud(cloud, dir.file("c.ply"), false);
  auto loaded = read_cloud(dir.file("c.ply"));
  REQUIRE(loaded.points.size() == 3);
  for (size_t i = 0; i < 3; ++i)
    CHECK((loaded.points[i] - cloud.points[i]).norm() < 1e-5);
  CHECK(!loaded.has_intensity());
}

TEST_CASE("csv round trip keeps doubles exact") {
  test::TempDir dir("cloud");
  auto cloud = sample_cloud(true);
  write_cloud(cloud, dir.file("c.csv"));
  auto loaded = read_cloud(dir.file("c.csv"));
  REQUIRE(loaded.points.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(loaded.points[i] == cloud.points[i]);
    CHECK(loaded.intensity[i] == cloud.intensity[i]);
  }
}

TEST_CASE("ply with reordered properties") {
  test::TempDir dir("cloud");
  test::write_text(dir.file("r.ply"),
                   "ply\nformat ascii 1.0\nelement vertex 1\n"
                   "property float z\nproperty float x\nproperty float y\n"
                   "end_header\n3.0 1.0 2.0\n");
  auto loaded = read_cloud(dir.file("r.ply"));
  REQUIRE(loaded.points.size() == 1);
  CHECK(loaded.points[0] == Point3(1.0, 2.0, 3.0));
}

TEST_CASE("malformed clouds are rejected") {
  test::TempDir dir("cloud");
  test::write_text(dir.file("bad.ply"), "not a ply\n");
  CHECK_THROWS_AS(read_cloud(dir.file("bad.ply")), CalibError);

  test::write_text(dir.file("trunc.ply"),
                   "ply\nformat binary_little_endian 1.0\nelement vertex 5\n"
                   "property float x\nproperty float y\nproperty float z\n"
                   "end_header\nxx");
  CHECK_THROWS_AS(read_cloud(dir.file("trunc.ply")), CalibError);

  test::write_text(dir.file("hdr.csv"), "a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(read_cloud(dir.file("hdr.csv")), CalibError);

  test::write_text(dir.file("nan.csv"), "x,y,z\nnan,0,0\n");
  CHECK_THROWS_AS(read_cloud(dir.file("nan.csv")), CalibError);

  CHECK_THROWS_AS(read_cloud(dir.file("c.xyz")), CalibError);
}

TEST_CASE("crop keeps the strict interior") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 1, 1}, {5, 5, 5}, {2, -3, 1}, {2, 2, 2}};
  cloud.intensity = {1, 2, 3, 4, 5};
  RoiBox roi{{-1, -1, -1}, {3, 3, 3}};

  auto cropped = crop_cloud(cloud, roi);
  // Oracle: per-point box test.
  std::vector<size_t> expect;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    bool in = true;
    for (int k = 0; k < 3; ++k) in = in && roi.min[k] < p[k] && p[k] < roi.max[k];
    if (in) expect.push_back(i);
  }
  REQUIRE(cropped.points.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    CHECK(cropped.points[i] == cloud.points[expect[i]]);
    CHECK(cropped.intensity[i] == cloud.intensity[expect[i]]);
  }
}

TEST_CASE("crop of an all-inside cloud is identity") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 1, 1}};
  auto cropped = crop_cloud(cloud, {{-10, -10, -10}, {10, 10, 10}});
  CHECK(cropped.points == cloud.points);
}

TEST_CASE("crop excluding everything throws") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}};
  try {
    crop_cloud(cloud, {{5, 5, 5}, {6, 6, 6}});
    FAIL("expected EmptyAfterCrop");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::EmptyAfterCrop);
  }
  // Boundary points are outside: the interior is open.
  CHECK_THROWS_AS(crop_cloud(cloud, {{0, 0, 0}, {1, 1, 1}}), CalibError);
  // Degenerate box is a config error.
  CHECK_THROWS_AS(crop_cloud(cloud, {{1, 0, 0}, {-1, 5, 5}}), CalibError);
}

TEST_SUITE_END();
