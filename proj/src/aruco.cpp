#include "calibcube/aruco.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "calibcube/error.hpp"

namespace calibcube {

namespace {

// Generated once: candidates accepted in a fixed pseudo-random order when
// 4 <= popcount <= 12 and every rotation pair (against itself and all
// accepted codes) is at least 3 bits apart. The property test enforces
// these criteria on the committed table.
constexpr std::array<uint16_t, 50> kCalib4x4Codes = {
    0x65f4, 0x454f, 0x81ec, 0x749b, 0xa2ea, 0x32e1, 0xab3c, 0x8ac3, 0xb0a6, 0x3d09,
    0xdef6, 0xdb7b, 0xa92f, 0x4d19, 0x80ab, 0x1255, 0x7f86, 0x4f64, 0x9ed7, 0xf10d,
    0x634c, 0x7269, 0x3300, 0x6316, 0x0225, 0xbab0, 0xc529, 0xc6f7, 0xa383, 0x43a1,
    0x31df, 0x1729, 0x922a, 0x75ce, 0x1e37, 0x79ad, 0x52da, 0x3356, 0x7d77, 0x3c71,
    0xc714, 0x0ec1, 0x9698, 0x7656, 0x3c8f, 0x5d7b, 0xf170, 0x8f1d, 0x18fb, 0xd50e};

int hamming(uint16_t a, uint16_t b) { return __builtin_popcount(unsigned(a ^ b)); }

}  // namespace

uint16_t rotate_code_cw(uint16_t code) {
  uint16_t out = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (code & (1u << ((3 - c) * 4 + r))) out |= uint16_t(1u << (r * 4 + c));
  return out;
}

const MarkerDictionary& builtin_dictionary(const std::string& name) {
  static const MarkerDictionary calib4x4_50 = [] {
    MarkerDictionary d;
    d.name = "calib4x4_50";
    d.grid = 4;
    d.codes.assign(kCalib4x4Codes.begin(), kCalib4x4Codes.end());
    return d;
  }();
  if (name == calib4x4_50.name) return calib4x4_50;
  throw CalibError(Errc::ConfigError, "unknown marker dictionary '" + name + "'");
}

bool quad_is_convex(const std::array<Point2, 4>& q) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    Point2 a = q[size_t((i + 1) % 4)] - q[size_t(i)];
    Point2 b = q[size_t((i + 2) % 4)] - q[size_t((i + 1) % 4)];
    double z = a.x() * b.y() - a.y() * b.x();
    if (z == 0) return false;
    int s = z > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

namespace {

double quad_area(const std::array<Point2, 4>& q) {
  double acc = 0;
  for (int i = 0; i < 4; ++i) {
    const Point2& a = q[size_t(i)];
    const Point2& b = q[size_t((i + 1) % 4)];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return std::abs(acc) / 2.0;
}

// Pixels strictly darker than their local box mean minus an offset.
std::vector<uint8_t> adaptive_dark_mask(const GrayImage& img, int window, int c) {
  const int w = img.width, h = img.height;
  const int r = window / 2;
  std::vector<uint64_t> integral(size_t(w + 1) * size_t(h + 1), 0);
  for (int y = 0; y < h; ++y) {
    uint64_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += img.at(x, y);
      integral[size_t(y + 1) * size_t(w + 1) + size_t(x + 1)] =
          integral[size_t(y) * size_t(w + 1) + size_t(x + 1)] + row;
    }
  }
  auto box_sum = [&](int x0, int y0, int x1, int y1) {  // inclusive corners
    return integral[size_t(y1 + 1) * size_t(w + 1) + size_t(x1 + 1)] -
           integral[size_t(y0) * size_t(w + 1) + size_t(x1 + 1)] -
           integral[size_t(y1 + 1) * size_t(w + 1) + size_t(x0)] +
           integral[size_t(y0) * size_t(w + 1) + size_t(x0)];
  };
  std::vector<uint8_t> mask(size_t(w) * size_t(h), 0);
  for (int y = 0; y < h; ++y) {
    int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      double mean = double(box_sum(x0, y0, x1, y1)) /
                    (double(x1 - x0 + 1) * double(y1 - y0 + 1));
      if (double(img.at(x, y)) < mean - double(c)) mask[size_t(y) * w + x] = 1;
    }
  }
  return mask;
}

struct Contour {
  std::vector<Point2> points;  // crack vertices, clockwise (y down)
};

// Walks the crack boundary of the 4-connected component containing
// (sx, sy), keeping foreground on the right. Vertices are pixel-corner
// positions, so they sit on the true dark/light transition with no
// half-pixel bias. Marks visited component pixels in `claimed`.
Contour trace_component(const std::vector<uint8_t>& mask, std::vector<uint8_t>& claimed,
                        int w, int h, int sx, int sy) {
  // Flood fill the component first (4-connectivity matches the crack walk).
  std::vector<std::pair<int, int>> stack = {{sx, sy}};
  std::vector<std::pair<int, int>> pixels;
  claimed[size_t(sy) * w + sx] = 1;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    pixels.push_back({x, y});
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      size_t idx = size_t(ny) * w + nx;
      if (mask[idx] && !claimed[idx]) {
        claimed[idx] = 1;
        stack.push_back({nx, ny});
      }
    }
  }
  auto fg = [&](int x, int y) {
    return x >= 0 && x < w && y >= 0 && y < h && claimed[size_t(y) * w + x] == 2;
  };
  for (auto [x, y] : pixels) claimed[size_t(y) * w + x] = 2;

  // Directions clockwise on screen: right, down, left, up.
  const int dirx[4] = {1, 0, -1, 0}, diry[4] = {0, 1, 0, -1};
  // Pixel right of / left of the edge traversed from corner (cx,cy) in dir d.
  auto right_px = [&](int cx, int cy, int d, int& px, int& py) {
    switch (d) {
      case 0: px = cx; py = cy; break;
      case 1: px = cx - 1; py = cy; break;
      case 2: px = cx - 1; py = cy - 1; break;
      default: px = cx; py = cy - 1; break;
    }
  };
  auto left_px = [&](int cx, int cy, int d, int& px, int& py) {
    switch (d) {
      case 0: px = cx; py = cy - 1; break;
      case 1: px = cx; py = cy; break;
      case 2: px = cx - 1; py = cy; break;
      default: px = cx - 1; py = cy - 1; break;
    }
  };

  int start_x = pixels[0].first, start_y = pixels[0].second;
  for (auto [x, y] : pixels)
    if (y < start_y || (y == start_y && x < start_x)) start_x = x, start_y = y;

  Contour contour;
  int cx = start_x, cy = start_y, d = 0;
  const size_t max_steps = 4 * (size_t(w) * h + 4);
  for (size_t step = 0; step < max_steps; ++step) {
    contour.points.emplace_back(cx - 0.5, cy - 0.5);
    // Most clockwise admissible turn first: right, straight, left, back.
    int nd = d;
    bool found = false;
    for (int turn = 0; turn < 4 && !found; ++turn) {
      int cand = (d + (turn == 0 ? 1 : turn == 1 ? 0 : turn == 2 ? 3 : 2)) % 4;
      int rx, ry, lx, ly;
      right_px(cx, cy, cand, rx, ry);
      left_px(cx, cy, cand, lx, ly);
      if (fg(rx, ry) && !fg(lx, ly)) {
        nd = cand;
        found = true;
      }
    }
    if (!found) break;  // isolated pixel fully surrounded; cannot happen
    d = nd;
    cx += dirx[d];
    cy += diry[d];
    if (cx == start_x && cy == start_y) break;
  }
  for (auto [x, y] : pixels) claimed[size_t(y) * w + x] = 1;
  return contour;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  Point2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

void douglas_peucker(const std::vector<Point2>& pts, size_t lo, size_t hi, double eps,
                     std::vector<size_t>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1;
  size_t split = lo;
  for (size_t i = lo + 1; i < hi; ++i) {
    double dist = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (dist > worst) {
      worst = dist;
      split = i;
    }
  }
  if (worst <= eps) return;
  keep.push_back(split);
  douglas_peucker(pts, lo, split, eps, keep);
  douglas_peucker(pts, split, hi, eps, keep);
}

// Closed-curve polygon simplification: anchor at the two mutually farthest
// points, then simplify both arcs.
std::vector<size_t> simplify_closed(const std::vector<Point2>& pts, double eps) {
  size_t a = 0;
  double best = -1;
  for (size_t i = 1; i < pts.size(); ++i) {
    double dist = (pts[i] - pts[0]).squaredNorm();
    if (dist > best) {
      best = dist;
      a = i;
    }
  }
  size_t b = 0;
  best = -1;
  for (size_t i = 0; i < pts.size(); ++i) {
    double dist = (pts[i] - pts[a]).squaredNorm();
    if (dist > best) {
      best = dist;
      b = i;
    }
  }
  if (a > b) std::swap(a, b);
  std::vector<size_t> keep = {a, b};
  douglas_peucker(pts, a, b, eps, keep);
  // Wrap the second arc through the end of the list.
  std::vector<Point2> wrapped(pts.begin() + long(b), pts.end());
  wrapped.insert(wrapped.end(), pts.begin(), pts.begin() + long(a) + 1);
  std::vector<size_t> keep2;
  douglas_peucker(wrapped, 0, wrapped.size() - 1, eps, keep2);
  for (size_t k : keep2) keep.push_back((b + k) % pts.size());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  return keep;
}

// Total-least-squares line through contour points between two quad
// vertices, trimming the ends where the corner rounding lives.
struct Line {
  Point2 point;
  Point2 dir;  // unit
};

bool fit_edge_line(const std::vector<Point2>& contour, size_t from, size_t to, Line& out) {
  std::vector<Point2> seg;
  size_t n = contour.size();
  for (size_t i = from; i != to; i = (i + 1) % n) seg.push_back(contour[i]);
  seg.push_back(contour[to]);
  if (seg.size() < 6) return false;
  size_t trim = std::max<size_t>(1, seg.size() / 10);
  std::vector<Point2> body(seg.begin() + long(trim), seg.end() - long(trim));
  if (body.size() < 4) return false;
  Point2 mean = Point2::Zero();
  for (const Point2& p : body) mean += p;
  mean /= double(body.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const Point2& p : body) {
    Point2 d = p - mean;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  out.point = mean;
  out.dir = eig.eigenvectors().col(1);  // largest eigenvalue
  return true;
}

bool intersect_lines(const Line& a, const Line& b, Point2& out) {
  double cross = a.dir.x() * b.dir.y() - a.dir.y() * b.dir.x();
  if (std::abs(cross) < 1e-9) return false;
  Point2 d = b.point - a.point;
  double t = (d.x() * b.dir.y() - d.y() * b.dir.x()) / cross;
  out = a.point + t * a.dir;
  return true;
}

// Exact homography sending the unit-square-like canonical quad to `dst`.
Eigen::Matrix3d homography_from_canonical(double side,
                                          const std::array<Point2, 4>& dst) {
  const std::array<Point2, 4> src = {Point2(0, 0), Point2(side, 0), Point2(side, side),
                                     Point2(0, side)};
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    double x = src[size_t(i)].x(), y = src[size_t(i)].y();
    double u = dst[size_t(i)].x(), v = dst[size_t(i)].y();
    a.row(2 * i) << x, y, 1, 0, 0, 0, -x * u, -y * u;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -x * v, -y * v;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::Matrix<double, 8, 1> hv = a.fullPivLu().solve(b);
  Eigen::Matrix3d hm;
  hm << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), 1.0;
  return hm;
}

double bilinear_sample(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, double(img.width - 1));
  y = std::clamp(y, 0.0, double(img.height - 1));
  int x0 = int(x), y0 = int(y);
  int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x1, y0) +
         (1 - fx) * fy * img.at(x0, y1) + fx * fy * img.at(x1, y1);
}

}  // namespace

std::vector<MarkerDetection> detect_markers(const GrayImage& img,
                                            const MarkerDictionary& dict,
                                            const DetectParams& params) {
  if (img.width < 32 || img.height < 32)
    throw CalibError(Errc::ConfigError, "image too small for marker detection");
  const int w = img.width, h = img.height;
  std::vector<uint8_t> mask = adaptive_dark_mask(img, params.thresh_window, params.thresh_c);
  std::vector<uint8_t> claimed(mask.size(), 0);

  const int cells = dict.grid + 2;  // bit grid plus the black border
  std::vector<MarkerDetection> detections;
  std::vector<double> areas;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      size_t idx = size_t(sy) * w + sx;
      if (!mask[idx] || claimed[idx]) continue;
      Contour contour = trace_component(mask, claimed, w, h, sx, sy);
      if (contour.points.size() < 16) continue;

      double perimeter = 0;
      for (size_t i = 0; i < contour.points.size(); ++i)
        perimeter += (contour.points[(i + 1) % contour.points.size()] - contour.points[i]).norm();
      std::vector<size_t> vtx =
          simplify_closed(contour.points, std::max(2.5, 0.015 * perimeter));
      if (vtx.size() != 4) continue;

      std::array<Point2, 4> quad;
      for (int i = 0; i < 4; ++i) quad[size_t(i)] = contour.points[vtx[size_t(i)]];
      if (!quad_is_convex(quad)) continue;
      if (quad_area(quad) < params.min_quad_area) continue;
      bool sides_ok = true;
      bool border_ok = true;
      for (int i = 0; i < 4; ++i) {
        double side = (quad[size_t((i + 1) % 4)] - quad[size_t(i)]).norm();
        sides_ok = sides_ok && side >= params.min_side_px;
        border_ok = border_ok && quad[size_t(i)].x() > 1 && quad[size_t(i)].y() > 1 &&
                    quad[size_t(i)].x() < w - 2 && quad[size_t(i)].y() < h - 2;
      }
      if (!sides_ok || !border_ok) continue;

      // Replace crack-corner vertices by intersections of per-edge line fits.
      std::array<Line, 4> lines;
      bool lines_ok = true;
      for (int i = 0; i < 4; ++i)
        lines_ok = lines_ok && fit_edge_line(contour.points, vtx[size_t(i)],
                                             vtx[size_t((i + 1) % 4)], lines[size_t(i)]);
      if (lines_ok) {
        std::array<Point2, 4> refined;
        bool inter_ok = true;
        for (int i = 0; i < 4; ++i)
          inter_ok = inter_ok &&
                     intersect_lines(lines[size_t((i + 3) % 4)], lines[size_t(i)],
                                     refined[size_t(i)]);
        if (inter_ok && quad_is_convex(refined)) {
          bool close = true;
          for (int i = 0; i < 4; ++i)
            close = close && (refined[size_t(i)] - quad[size_t(i)]).norm() < 5.0;
          if (close) quad = refined;
        }
      }

      // Sample the cell grid through the quad homography.
      Eigen::Matrix3d hm = homography_from_canonical(double(cells), quad);
      auto warp = [&](double u, double v) {
        Eigen::Vector3d p = hm * Eigen::Vector3d(u, v, 1.0);
        return Point2(p.x() / p.z(), p.y() / p.z());
      };
      std::array<double, 36> cell_mean{};
      for (int r = 0; r < cells; ++r) {
        for (int c2 = 0; c2 < cells; ++c2) {
          double acc = 0;
          for (int j = 1; j <= 3; ++j) {
            for (int i = 1; i <= 3; ++i) {
              Point2 p = warp(c2 + i * 0.25, r + j * 0.25);
              acc += bilinear_sample(img, p.x(), p.y());
            }
          }
          cell_mean[size_t(r * cells + c2)] = acc / 9.0;
        }
      }
      double lo = *std::min_element(cell_mean.begin(), cell_mean.end());
      double hi2 = *std::max_element(cell_mean.begin(), cell_mean.end());
      if (hi2 - lo < 30.0) continue;  // not enough contrast to be a marker
      double split = (lo + hi2) / 2.0;

      bool border_black = true;
      for (int r = 0; r < cells && border_black; ++r)
        for (int c2 = 0; c2 < cells && border_black; ++c2)
          if (r == 0 || c2 == 0 || r == cells - 1 || c2 == cells - 1)
            border_black = cell_mean[size_t(r * cells + c2)] < split;
      if (!border_black) continue;

      uint16_t code = 0;
      for (int r = 0; r < dict.grid; ++r)
        for (int c2 = 0; c2 < dict.grid; ++c2)
          if (cell_mean[size_t((r + 1) * cells + (c2 + 1))] > split)
            code |= uint16_t(1u << (r * dict.grid + c2));

      int match_id = -1, match_rot = 0, matches = 0;
      uint16_t probe = code;
      for (int rot = 0; rot < 4; ++rot) {
        for (size_t id = 0; id < dict.codes.size(); ++id) {
          if (hamming(probe, dict.codes[id]) <= params.max_hamming) {
            ++matches;
            match_id = int(id);
            match_rot = rot;
          }
        }
        probe = rotate_code_cw(probe);
      }
      if (matches != 1) continue;

      // probe = rot_cw^rot(code) equals the canonical code, so the marker
      // appears rotated (4 - rot) % 4 quarter turns clockwise: the canonical
      // top-left sits at quad corner (4 - rot) % 4.
      int shift = (4 - match_rot) % 4;
      MarkerDetection det;
      det.id = match_id;
      for (int k = 0; k < 4; ++k) det.corners[size_t(k)] = quad[size_t((k + shift) % 4)];
      detections.push_back(det);
      areas.push_back(quad_area(quad));
    }
  }

  // Duplicate IDs: keep the larger quad.
  std::vector<MarkerDetection> unique;
  std::vector<double> unique_area;
  for (size_t i = 0; i < detections.size(); ++i) {
    bool replaced = false;
    for (size_t j = 0; j < unique.size(); ++j) {
      if (unique[j].id == detections[i].id) {
        if (areas[i] > unique_area[j]) {
          unique[j] = detections[i];
          unique_area[j] = areas[i];
        }
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      unique.push_back(detections[i]);
      unique_area.push_back(areas[i]);
    }
  }
  std::sort(unique.begin(), unique.end(),
            [](const MarkerDetection& a, const MarkerDetection& b) { return a.id < b.id; });
  return unique;
}

RefinedCorners refine_corners(const GrayImage& img, const std::vector<Point2>& corners,
                              int window) {
  RefinedCorners out;
  out.points = corners;
  out.moved.assign(corners.size(), false);
  if (window < 2) return out;

  for (size_t ci = 0; ci < corners.size(); ++ci) {
    Point2 c = corners[ci];
    // The estimate may drift up to `window` px before the walk-away guard
    // fires, and sampling reaches window + 1 px beyond that.
    const double margin = 2 * window + 2;
    if (c.x() < margin || c.y() < margin || c.x() > img.width - 1 - margin ||
        c.y() > img.height - 1 - margin)
      continue;

    bool ok = true;
    Point2 cur = c;
    for (int iter = 0; iter < 12 && ok; ++iter) {
      int cx = int(std::lround(cur.x())), cy = int(std::lround(cur.y()));
      Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
      Eigen::Vector2d b = Eigen::Vector2d::Zero();
      for (int dy = -window; dy <= window; ++dy) {
        for (int dx = -window; dx <= window; ++dx) {
          int x = cx + dx, y = cy + dy;
          double gx = (double(img.at(x + 1, y)) - double(img.at(x - 1, y))) / 2.0;
          double gy = (double(img.at(x, y + 1)) - double(img.at(x, y - 1))) / 2.0;
          double wgt = std::exp(-(dx * dx + dy * dy) / (2.0 * (window / 2.0) * (window / 2.0)));
          Eigen::Matrix2d g;
          g << gx * gx, gx * gy, gx * gy, gy * gy;
          a += wgt * g;
          b += wgt * g * Eigen::Vector2d(x, y);
        }
      }
      if (std::abs(a.determinant()) < 1e-9) {
        ok = false;
        break;
      }
      Eigen::Vector2d next = a.ldlt().solve(b);
      double step = (next - Eigen::Vector2d(cur)).norm();
      cur = next;
      if ((cur - c).norm() > window) {
        ok = false;
        break;
      }
      if (step < 1e-3) break;
    }
    if (ok) {
      out.points[ci] = cur;
      out.moved[ci] = true;
    }
  }
  return out;
}

std::vector<MarkerDetection> load_external_detections(const std::string& path,
                                                      const MarkerDictionary& dict) {
  std::ifstream in(path);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CalibError(Errc::ParseError, path + ": " + e.what());
  }
  if (!doc.is_array())
    throw CalibError(Errc::ParseError, path + ": expected a top-level array");

  std::vector<MarkerDetection> out;
  for (const auto& entry : doc) {
    MarkerDetection det;
    try {
      det.id = entry.at("id").get<int>();
      const auto& corners = entry.at("corners");
      if (!corners.is_array() || corners.size() != 4)
        throw CalibError(Errc::ParseError, path + ": corners must be 4 [x,y] pairs");
      for (size_t k = 0; k < 4; ++k) {
        det.corners[k] =
            Point2(corners[k].at(0).get<double>(), corners[k].at(1).get<double>());
        if (!det.corners[k].allFinite())
          throw CalibError(Errc::ParseError, path + ": non-finite corner");
      }
    } catch (const nlohmann::json::exception& e) {
      throw CalibError(Errc::ParseError, path + ": " + e.what());
    }
    if (det.id < 0 || size_t(det.id) >= dict.codes.size())
      throw CalibError(Errc::InvariantViolation,
                       "marker id " + std::to_string(det.id) + " not in dictionary " +
                           dict.name);
    if (!quad_is_convex(det.corners))
      throw CalibError(Errc::InvariantViolation,
                       "marker id " + std::to_string(det.id) + " has a non-convex quad");
    out.push_back(det);
  }
  return out;
}

std::vector<std::pair<int, Point2>> match_to_target(
    const std::vector<MarkerDetection>& detections, const TargetSpec& spec) {
  std::vector<std::pair<int, Point2>> out;
  std::vector<int> seen;
  for (const MarkerDetection& det : detections) {
    if (std::find(seen.begin(), seen.end(), det.id) != seen.end())
      throw CalibError(Errc::InvariantViolation,
                       "duplicate detection for marker id " + std::to_string(det.id));
    seen.push_back(det.id);
    auto [face, slot] = spec.find_marker(det.id);
    if (face < 0)
      throw CalibError(Errc::UnknownMarkerId,
                       "marker id " + std::to_string(det.id) + " is not on the target");
    for (int k = 0; k < 4; ++k)
      out.push_back({face * 4 * spec.markers_per_face() + slot * 4 + k,
                     det.corners[size_t(k)]});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace calibcube
