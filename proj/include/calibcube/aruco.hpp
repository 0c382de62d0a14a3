#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "calibcube/geometry.hpp"
#include "calibcube/image.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

// Square binary marker dictionary: grid*grid bits per code, bit r*grid+c
// row-major from the canonical top-left, 1 = white cell.
struct MarkerDictionary {
  std::string name;
  int grid = 4;
  std::vector<uint16_t> codes;
};

// The built-in 50-entry 4x4 dictionary. Any two codes (and any two distinct
// rotations of the same code) differ by at least 3 bits across all rotation
// pairs, so Hamming-1 correction can never alias IDs or orientations.
// Throws ConfigError for unknown names.
const MarkerDictionary& builtin_dictionary(const std::string& name);

// Code as read after rotating the marker 90 degrees clockwise.
uint16_t rotate_code_cw(uint16_t code);

// Corners in canonical order: the marker's own top-left first, clockwise.
struct MarkerDetection {
  int id = -1;
  std::array<Point2, 4> corners;
};

struct DetectParams {
  int thresh_window = 15;   // adaptive threshold neighborhood (odd)
  int thresh_c = 7;         // threshold offset below the local mean
  double min_quad_area = 100.0;
  double min_side_px = 8.0;
  int max_hamming = 1;
};

// Adaptive threshold, contour tracing, quadrilateral approximation,
// perspective rectification, bit lookup over all 4 rotations. Corners are
// subpixel (total-least-squares line fits along each contour edge).
// Duplicate IDs keep the larger quad. Empty list when nothing is found.
std::vector<MarkerDetection> detect_markers(const GrayImage& img,
                                            const MarkerDictionary& dict,
                                            const DetectParams& params = {});

struct RefinedCorners {
  std::vector<Point2> points;
  std::vector<bool> moved;  // false: kept as input (border or no gradient)
};

// Gradient saddle refinement within +-window px. Corners too close to the
// border or in flat patches are returned unchanged and flagged.
RefinedCorners refine_corners(const GrayImage& img, const std::vector<Point2>& corners,
                              int window);

// JSON array of {"id": int, "corners": [[x,y] x4]}. Corners must form a
// convex, non-self-intersecting quad and the ID must exist in `dict`.
std::vector<MarkerDetection> load_external_detections(const std::string& path,
                                                      const MarkerDictionary& dict);

// True when the quad is convex and traversed without self-intersection.
bool quad_is_convex(const std::array<Point2, 4>& corners);

// Maps each detection's corners to their global target corner indices
// (face*20 + slot*4 + k). Missing markers are simply absent; IDs outside
// the spec layout throw UnknownMarkerId; duplicate IDs are an
// InvariantViolation. Result sorted by index.
std::vector<std::pair<int, Point2>> match_to_target(
    const std::vector<MarkerDetection>& detections, const TargetSpec& spec);

}  // namespace calibcube
