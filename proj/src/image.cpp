#include "calibcube/image.hpp"

#include <png.h>

#include <charconv>
#include <csetjmp>
#include <cstdio>
#include <fstream>

#include "calibcube/error.hpp"

namespace calibcube {
namespace {

std::string extension_of(const std::string& path) {
  size_t dot = path.find_last_of('.');
  size_t sep = path.find_last_of('/');
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep)) return "";
  return path.substr(dot);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Header: "P5", whitespace/comment separated width, height, maxval,
  // then one whitespace byte before the raster.
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < bytes.size() && !isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5")
    throw CalibError(Errc::ParseError, path + ": not a binary PGM (P5)");
  auto parse_num = [&](const std::string& tok) {
    int v = -1;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v <= 0)
      throw CalibError(Errc::ParseError, path + ": bad PGM header field '" + tok + "'");
    return v;
  };
  int w = parse_num(next_token());
  int h = parse_num(next_token());
  int maxval = parse_num(next_token());
  if (maxval != 255)
    throw CalibError(Errc::ParseError, path + ": only maxval 255 is supported");
  ++pos;  // single whitespace after maxval
  size_t need = size_t(w) * size_t(h);
  if (bytes.size() - pos < need)
    throw CalibError(Errc::ParseError, path + ": truncated PGM raster");

  GrayImage img(w, h);
  std::copy_n(reinterpret_cast<const uint8_t*>(bytes.data()) + pos, need,
              img.pixels.begin());
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
}

GrayImage read_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw CalibError(Errc::IoError, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    throw CalibError(Errc::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw CalibError(Errc::ParseError, path + ": PNG decode failed");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
      color_type == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);  // default luma weights
  png_read_update_info(png, info);

  GrayImage img(int(png_get_image_width(png, info)), int(png_get_image_height(png, info)));
  std::vector<png_bytep> rows(size_t(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[size_t(y)] = img.pixels.data() + size_t(y) * img.width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

void write_png(const GrayImage& img, const std::string& path) {
  std::vector<uint8_t> bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CalibError(Errc::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw CalibError(Errc::IoError, path + ": short write");
}

}  // namespace

GrayImage read_image(const std::string& path) {
  std::string ext = extension_of(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw CalibError(Errc::ParseError, path + ": unsupported image extension '" + ext + "'");
}

std::vector<uint8_t> encode_png(const GrayImage& img) {
  std::vector<uint8_t> bytes;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    throw CalibError(Errc::IoError, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw CalibError(Errc::IoError, "PNG encode failed");
  }
  png_set_write_fn(
      png, &bytes,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(p));
        out->insert(out->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(size_t(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[size_t(y)] =
        const_cast<png_bytep>(img.pixels.data() + size_t(y) * img.width);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void write_image(const GrayImage& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != size_t(img.width) * size_t(img.height))
    throw CalibError(Errc::InvariantViolation, "image dimensions do not match pixel count");
  std::string ext = extension_of(path);
  if (ext == ".pgm") return write_pgm(img, path);
  if (ext == ".png") return write_png(img, path);
  throw CalibError(Errc::IoError, path + ": unsupported image extension '" + ext + "'");
}

}  // namespace calibcube
