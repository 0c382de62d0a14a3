#pragma once

#include <vector>

#include "calibcube/geometry.hpp"

namespace calibcube {

struct Ellipse {
  Point2 center = Point2::Zero();
  double semi_major = 0;  // >= semi_minor
  double semi_minor = 0;
  double angle = 0;  // orientation of the major axis, radians in [-pi/2, pi/2)
};

// Direct constrained least-squares conic fit restricted to ellipses.
// Needs at least 6 points; throws TooFewPoints below that and
// DegenerateConfiguration when no ellipse explains the points
// (collinear input, rank-deficient scatter).
Ellipse fit_ellipse(const std::vector<Point2>& points);

}  // namespace calibcube
