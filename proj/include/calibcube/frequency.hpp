#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "calibcube/ellipse.hpp"
#include "calibcube/events.hpp"
#include "calibcube/geometry.hpp"
#include "calibcube/target.hpp"

namespace calibcube {

// Half-open microsecond interval [begin_us, end_us).
struct TimeWindow {
  int64_t begin_us = 0;
  int64_t end_us = 0;
  int64_t duration() const { return end_us - begin_us; }
};

struct FrequencyConfig {
  int64_t bin_dt_us = 1000;   // temporal bin width
  int n_segments = 10;        // segment maps per recording
  double f_min_hz = 10.0;     // band-pass lower edge
  double f_max_hz = 200.0;    // band-pass upper edge
  int min_active_bins = 4;    // pixels below this stay silent

  void validate() const;
};

// Per-pixel dominant blink frequency in Hz over one segment; 0 = none.
struct FrequencyMap {
  int width = 0;
  int height = 0;
  TimeWindow segment;
  std::vector<double> values;  // row-major, width*height

  double at(int x, int y) const { return values[size_t(y) * width + x]; }
  double& at(int x, int y) { return values[size_t(y) * width + x]; }
};

// Axis-aligned pixel box, inclusive corners.
struct BoundingBox {
  Point2 min = Point2::Zero();
  Point2 max = Point2::Zero();
};

struct LedKeypoint {
  int corner_index = -1;
  Point2 center = Point2::Zero();
  Ellipse ellipse;
  double frequency_hz = 0;
  bool degraded = false;  // centroid fallback, ellipse fields not meaningful
};

// Per-pixel +/-1 square wave over the window's temporal bins. Bin value is
// +1 when positive polarities strictly outnumber negative ones, -1 when
// outnumbered, and the previous bin's value on ties and empty bins (the LED
// holds its state between transitions); the value before the first bin is -1.
// `events` must be sorted by time and belong to one pixel.
std::vector<int8_t> build_pixel_signal(const std::vector<Event>& events,
                                       TimeWindow window,
                                       const FrequencyConfig& config);

// FFT magnitude peak per pixel, restricted to the configured band. Pixels
// with fewer than min_active_bins nonempty bins map to 0. Throws
// SegmentTooShort when the window spans fewer than 2*min_active_bins bins.
FrequencyMap estimate_frequency_map(const std::vector<Event>& stream,
                                    TimeWindow segment,
                                    const FrequencyConfig& config,
                                    int width, int height);

// Tight box over nonzero pixels; nullopt for an all-zero map.
std::optional<BoundingBox> active_bbox(const FrequencyMap& map);

// Consensus pick among segment maps: boxes straying 3 sigma from the
// per-coordinate mean are dropped, the survivor closest (L1) to the mean of
// the remaining boxes wins, lowest index on ties. Throws NoValidMap when no
// map has a nonempty box.
size_t select_best_map(const std::vector<FrequencyMap>& maps);

// Cuts [t0, t1) into n equal windows of length (t1-t0)/n (integer division;
// a sub-bin remainder at the tail is discarded).
std::vector<TimeWindow> split_segments(int64_t t0, int64_t t1, int n);

// One keypoint per LED whose frequency appears in the map inside `bbox`:
// mask pixels within tol of the nominal, fit an ellipse to the mask
// boundary (8-connectivity), fall back to the mask centroid (degraded) when
// the fit fails but the mask has >= 3 pixels. Throws MissingLeds when fewer
// than 4 LEDs produce keypoints.
std::vector<LedKeypoint> extract_led_keypoints(const FrequencyMap& map,
                                               const BoundingBox& bbox,
                                               const TargetSpec& spec,
                                               double tol_hz);

}  // namespace calibcube
