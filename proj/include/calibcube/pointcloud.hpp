#pragma once

#include <string>
#include <vector>

#include "calibcube/geometry.hpp"

namespace calibcube {

// Sensor-frame cloud in meters. `intensity` is either empty or one value
// per point.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<float> intensity;

  size_t size() const { return points.size(); }
  bool has_intensity() const { return !intensity.empty(); }
};

// Axis-aligned crop region, meters.
struct RoiBox {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();
};

// Reads .ply (ascii or binary_little_endian, float x/y/z, optional
// intensity) or .csv ("x,y,z" or "x,y,z,intensity" header).
PointCloud read_cloud(const std::string& path);

// Writes in the format implied by the extension; .ply defaults to binary.
void write_cloud(const PointCloud& cloud, const std::string& path,
                 bool binary_ply = true);

// Keeps points strictly inside the box, preserving order.
// Throws EmptyAfterCrop when nothing survives.
PointCloud crop_cloud(const PointCloud& cloud, const RoiBox& roi);

}  // namespace calibcube
