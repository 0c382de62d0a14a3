#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "calibcube/target.hpp"
#include "helpers.hpp"

using namespace calibcube;

TEST_SUITE_BEGIN("target");

TEST_CASE("unit cube corner layout") {
  TargetSpec spec;
  spec.edge_length = 1.0;
  spec.marker_side = 0.25;
  TargetGeometry geo = build_geometry(spec);

  CHECK(geo.corners[0].isApprox(Point3(0, 0, 0), 0));
  CHECK(geo.corners[1].isApprox(Point3(1, 0, 0), 0));
  CHECK(geo.corners[2].isApprox(Point3(0, 1, 0), 0));
  CHECK(geo.corners[3].isApprox(Point3(0, 0, 1), 0));
  CHECK(geo.corners[4].isApprox(Point3(1, 1, 0), 0));
  CHECK(geo.corners[5].isApprox(Point3(0, 1, 1), 0));
  CHECK(geo.corners[6].isApprox(Point3(1, 0, 1), 0));
}

TEST_CASE("sixty marker corners, five markers per face") {
  TargetSpec spec;
  CHECK(spec.markers_per_face() == 5);
  TargetGeometry geo = build_geometry(spec);
  CHECK(geo.aruco_corners.size() == 60);
}

TEST_CASE("every marker corner lies on exactly one face plane") {
  TargetSpec spec;
  TargetGeometry geo = build_geometry(spec);
  for (const Point3& a : geo.aruco_corners) {
    int zeros = 0;
    for (int k = 0; k < 3; ++k)
      if (a[k] == 0.0) ++zeros;
    CHECK(zeros == 1);
    for (int k = 0; k < 3; ++k) {
      CHECK(a[k] >= 0.0);
      CHECK(a[k] <= spec.edge_length);
    }
  }
}

TEST_CASE("corner pairwise distances are cube distances") {
  TargetSpec spec;
  spec.edge_length = 0.73;
  spec.marker_side = 0.2;
  TargetGeometry geo = build_geometry(spec);
  const double L = spec.edge_length;
  const std::array<double, 3> allowed = {L, L * std::sqrt(2.0), L * std::sqrt(3.0)};
  for (int i = 0; i < kNumLeds; ++i) {
    for (int j = i + 1; j < kNumLeds; ++j) {
      double d = (geo.corners[i] - geo.corners[j]).norm();
      bool ok = false;
      for (double a : allowed) ok = ok || std::abs(d - a) < 1e-9;
      CHECK(ok);
    }
  }
}

TEST_CASE("build_geometry is deterministic") {
  TargetSpec spec;
  TargetGeometry a = build_geometry(spec);
  TargetGeometry b = build_geometry(spec);
  CHECK(std::memcmp(a.corners.data(), b.corners.data(), sizeof(a.corners)) == 0);
  CHECK(std::memcmp(a.aruco_corners.data(), b.aruco_corners.data(),
                    sizeof(a.aruco_corners)) == 0);
}

TEST_CASE("invalid specs are rejected") {
  TargetSpec spec;
  spec.marker_side = spec.edge_length / 3.0;  // zero margin
  CHECK_THROWS_AS(build_geometry(spec), CalibError);

  TargetSpec dup;
  dup.led_frequencies_hz[1] = dup.led_frequencies_hz[0];
  CHECK_THROWS_AS(dup.validate(), CalibError);

  TargetSpec out_of_band;
  out_of_band.led_frequencies_hz[0] = 5.0;
  CHECK_THROWS_AS(out_of_band.validate(), CalibError);

  TargetSpec bad_edge;
  bad_edge.edge_length = 0.0;
  CHECK_THROWS_AS(bad_edge.validate(), CalibError);
}

TEST_CASE("corner_for_frequency") {
  TargetSpec spec;
  CHECK(corner_for_frequency(spec, 75.0, 2.0) == 2);
  CHECK(corner_for_frequency(spec, 76.0, 2.0) == 2);

  // Midway between 75 and 100 with a small tolerance: nothing matches.
  try {
    corner_for_frequency(spec, 87.5, 2.0);
    FAIL("expected NoMatch");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::NoMatch);
  }

  // Oracle: a linear scan over the configured table finds the same winner.
  for (int i = 0; i < kNumLeds; ++i) {
    double f = spec.led_frequencies_hz[i] + 0.9;
    int expected = -1;
    for (int j = 0; j < kNumLeds; ++j)
      if (std::abs(spec.led_frequencies_hz[j] - f) <= 2.0) expected = j;
    CHECK(corner_for_frequency(spec, f, 2.0) == expected);
  }

  // Violating the tolerance precondition is caught defensively.
  try {
    corner_for_frequency(spec, 87.5, 13.0);
    FAIL("expected AmbiguousMatch");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::AmbiguousMatch);
  }
}

TEST_CASE("frequency tolerance respects the LED gap") {
  TargetSpec spec;
  CHECK(frequency_tolerance(spec, 25.0) == doctest::Approx(2.0));
  CHECK(frequency_tolerance(spec, 175.0) == doctest::Approx(8.75));

  TargetSpec tight;
  tight.led_frequencies_hz = {100, 103, 106, 109, 112, 115, 118};
  CHECK_THROWS_AS(frequency_tolerance(tight, 118.0), CalibError);
}

TEST_CASE("target TOML round trip") {
  test::TempDir dir("target");
  TargetSpec spec;
  spec.edge_length = 0.62;
  spec.marker_side = 0.15;
  spec.marker_ids = {std::vector<int>{3, 9, 11, 20, 30},
                     std::vector<int>{1, 2, 4, 5, 6},
                     std::vector<int>{40, 41, 42, 43, 44}};
  save_target(spec, dir.file("target.toml"));
  TargetSpec loaded = load_target(dir.file("target.toml"));
  CHECK(loaded.edge_length == spec.edge_length);
  CHECK(loaded.marker_side == spec.marker_side);
  CHECK(loaded.led_frequencies_hz == spec.led_frequencies_hz);
  CHECK(loaded.marker_ids == spec.marker_ids);
  CHECK(loaded.dictionary == spec.dictionary);

  TargetGeometry a = build_geometry(spec);
  TargetGeometry b = build_geometry(loaded);
  CHECK(std::memcmp(a.aruco_corners.data(), b.aruco_corners.data(),
                    sizeof(a.aruco_corners)) == 0);
}

TEST_SUITE_END();
