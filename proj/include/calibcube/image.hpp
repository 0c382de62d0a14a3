#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace calibcube {

// 8-bit grayscale, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(size_t(w) * size_t(h), fill) {}

  uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Reads .pgm (binary P5) or .png (grayscale, or RGB reduced by luma).
GrayImage read_image(const std::string& path);

// Writes the format implied by the extension (.pgm or .png).
void write_image(const GrayImage& img, const std::string& path);

// Grayscale PNG bytes in memory; identical images encode identically.
std::vector<uint8_t> encode_png(const GrayImage& img);

}  // namespace calibcube
