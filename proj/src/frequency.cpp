#include "calibcube/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/FFT>

#include "calibcube/error.hpp"

namespace calibcube {

void FrequencyConfig::validate() const {
  if (bin_dt_us <= 0) throw CalibError(Errc::ConfigError, "bin_dt_us must be positive");
  if (n_segments < 1) throw CalibError(Errc::ConfigError, "n_segments must be at least 1");
  if (min_active_bins < 1)
    throw CalibError(Errc::ConfigError, "min_active_bins must be at least 1");
  if (!(0 < f_min_hz && f_min_hz < f_max_hz))
    throw CalibError(Errc::ConfigError, "need 0 < f_min_hz < f_max_hz");
  double nyquist = 0.5e6 / double(bin_dt_us);
  if (f_max_hz >= nyquist)
    throw CalibError(Errc::ConfigError, "f_max_hz must stay below the bin Nyquist rate");
}

std::vector<int8_t> build_pixel_signal(const std::vector<Event>& events,
                                       TimeWindow window,
                                       const FrequencyConfig& config) {
  const int64_t m64 = window.duration() / config.bin_dt_us;
  const size_t m = m64 > 0 ? size_t(m64) : 0;
  std::vector<int8_t> bins(m, 0);
  std::vector<int32_t> balance(m, 0);
  std::vector<uint8_t> occupied(m, 0);
  for (const Event& e : events) {
    if (e.t_us < window.begin_us || e.t_us >= window.end_us) continue;
    size_t k = size_t((e.t_us - window.begin_us) / config.bin_dt_us);
    if (k >= m) continue;  // tail remainder shorter than one bin
    balance[k] += e.polarity;
    occupied[k] = 1;
  }
  int8_t prev = -1;
  for (size_t k = 0; k < m; ++k) {
    if (occupied[k] && balance[k] != 0) prev = balance[k] > 0 ? 1 : -1;
    bins[k] = prev;
  }
  return bins;
}

namespace {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Dominant spectral peak of the mean-subtracted signal with parabolic
// sub-bin interpolation. The peak is looked up over the whole positive
// spectrum and only then band-checked: a square wave below the band has
// in-band harmonics, and reporting those instead of rejecting the pixel
// would defeat the band-pass role of the map.
double spectral_peak_hz(const std::vector<int8_t>& bins, const FrequencyConfig& config,
                        Eigen::FFT<double>& fft, std::vector<double>& padded,
                        std::vector<std::complex<double>>& spectrum) {
  const size_t m = bins.size();
  if (m < 2) return 0;
  const size_t n = next_pow2(4 * m);
  double mean = 0;
  for (int8_t b : bins) mean += b;
  mean /= double(m);
  padded.assign(n, 0.0);
  for (size_t i = 0; i < m; ++i) padded[i] = double(bins[i]) - mean;

  fft.fwd(spectrum, padded);

  const double dt_s = double(config.bin_dt_us) * 1e-6;
  const double hz_per_bin = 1.0 / (double(n) * dt_s);

  size_t peak = 1;
  double peak_mag = -1;
  for (size_t k = 1; k <= n / 2; ++k) {
    double mag = std::abs(spectrum[k]);
    if (mag > peak_mag) {
      peak_mag = mag;
      peak = k;
    }
  }
  if (peak_mag <= 0) return 0;

  double delta = 0;
  if (peak >= 1 && peak + 1 < n) {
    double alpha = std::abs(spectrum[peak - 1]);
    double beta = peak_mag;
    double gamma = std::abs(spectrum[peak + 1]);
    double denom = alpha - 2 * beta + gamma;
    if (std::abs(denom) > 1e-12) {
      delta = 0.5 * (alpha - gamma) / denom;
      delta = std::clamp(delta, -0.5, 0.5);
    }
  }
  double f = (double(peak) + delta) * hz_per_bin;
  if (f < config.f_min_hz || f > config.f_max_hz) return 0;
  return f;
}

}  // namespace

FrequencyMap estimate_frequency_map(const std::vector<Event>& stream,
                                    TimeWindow segment,
                                    const FrequencyConfig& config,
                                    int width, int height) {
  config.validate();
  if (width <= 0 || height <= 0)
    throw CalibError(Errc::ConfigError, "frequency map needs positive dimensions");
  if (segment.duration() < 2 * int64_t(config.min_active_bins) * config.bin_dt_us)
    throw CalibError(Errc::SegmentTooShort,
                     "segment shorter than 2*min_active_bins temporal bins");

  FrequencyMap map;
  map.width = width;
  map.height = height;
  map.segment = segment;
  map.values.assign(size_t(width) * height, 0.0);

  // Bucket events by pixel with a counting sort; only touched pixels matter.
  const size_t npix = size_t(width) * height;
  std::vector<uint32_t> counts(npix + 1, 0);
  for (const Event& e : stream) {
    if (e.t_us < segment.begin_us || e.t_us >= segment.end_us) continue;
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
      throw CalibError(Errc::InvariantViolation, "event outside the sensor frame");
    ++counts[size_t(e.y) * width + e.x + 1];
  }
  for (size_t i = 1; i <= npix; ++i) counts[i] += counts[i - 1];
  std::vector<Event> bucketed(counts[npix]);
  {
    std::vector<uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (const Event& e : stream) {
      if (e.t_us < segment.begin_us || e.t_us >= segment.end_us) continue;
      bucketed[cursor[size_t(e.y) * width + e.x]++] = e;
    }
  }

  Eigen::FFT<double> fft;
  std::vector<double> padded;
  std::vector<std::complex<double>> spectrum;
  std::vector<Event> pixel_events;
  for (size_t pix = 0; pix < npix; ++pix) {
    uint32_t lo = counts[pix], hi = counts[pix + 1];
    if (lo == hi) continue;
    pixel_events.assign(bucketed.begin() + lo, bucketed.begin() + hi);
    std::sort(pixel_events.begin(), pixel_events.end(),
              [](const Event& a, const Event& b) { return a.t_us < b.t_us; });

    std::vector<int8_t> bins = build_pixel_signal(pixel_events, segment, config);
    int active = 0;
    {
      const size_t m = bins.size();
      std::vector<uint8_t> occupied(m, 0);
      for (const Event& e : pixel_events) {
        size_t k = size_t((e.t_us - segment.begin_us) / config.bin_dt_us);
        if (k < m) occupied[k] = 1;
      }
      for (uint8_t o : occupied) active += o;
    }
    if (active < config.min_active_bins) continue;
    map.values[pix] = spectral_peak_hz(bins, config, fft, padded, spectrum);
  }
  return map;
}

std::optional<BoundingBox> active_bbox(const FrequencyMap& map) {
  int min_x = map.width, min_y = map.height, max_x = -1, max_y = -1;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (map.at(x, y) == 0.0) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return std::nullopt;
  BoundingBox box;
  box.min = Point2(min_x, min_y);
  box.max = Point2(max_x, max_y);
  return box;
}

size_t select_best_map(const std::vector<FrequencyMap>& maps) {
  struct Candidate {
    size_t index;
    std::array<double, 4> coords;
  };
  std::vector<Candidate> candidates;
  for (size_t i = 0; i < maps.size(); ++i) {
    auto box = active_bbox(maps[i]);
    if (!box) continue;
    candidates.push_back({i, {box->min.x(), box->min.y(), box->max.x(), box->max.y()}});
  }
  if (candidates.empty())
    throw CalibError(Errc::NoValidMap, "every segment map is empty");

  // 3-sigma rejection per bbox coordinate (population sigma). The boundary
  // is inclusive so a single stray box among n maps, which sits at exactly
  // sqrt(n-1) sigma, still gets dropped; sigma == 0 keeps everything.
  std::array<double, 4> mean{}, sigma{};
  for (int c = 0; c < 4; ++c) {
    for (const Candidate& cand : candidates) mean[c] += cand.coords[c];
    mean[c] /= double(candidates.size());
    double var = 0;
    for (const Candidate& cand : candidates) {
      double d = cand.coords[c] - mean[c];
      var += d * d;
    }
    sigma[c] = std::sqrt(var / double(candidates.size()));
  }
  std::vector<Candidate> survivors;
  for (const Candidate& cand : candidates) {
    bool keep = true;
    for (int c = 0; c < 4; ++c) {
      if (sigma[c] > 0 && std::abs(cand.coords[c] - mean[c]) >= 3.0 * sigma[c]) {
        keep = false;
        break;
      }
    }
    if (keep) survivors.push_back(cand);
  }
  if (survivors.empty()) survivors = candidates;  // unreachable; belt and braces

  std::array<double, 4> reference{};
  for (int c = 0; c < 4; ++c) {
    for (const Candidate& cand : survivors) reference[c] += cand.coords[c];
    reference[c] /= double(survivors.size());
  }

  size_t best = survivors.front().index;
  double best_l1 = std::numeric_limits<double>::infinity();
  for (const Candidate& cand : survivors) {
    double l1 = 0;
    for (int c = 0; c < 4; ++c) l1 += std::abs(cand.coords[c] - reference[c]);
    if (l1 < best_l1) {
      best_l1 = l1;
      best = cand.index;
    }
  }
  return best;
}

std::vector<TimeWindow> split_segments(int64_t t0, int64_t t1, int n) {
  if (n < 1 || t1 <= t0)
    throw CalibError(Errc::ConfigError, "cannot split an empty time range");
  int64_t d = (t1 - t0) / n;
  if (d <= 0) throw CalibError(Errc::SegmentTooShort, "range shorter than one segment");
  std::vector<TimeWindow> out;
  out.reserve(size_t(n));
  for (int i = 0; i < n; ++i)
    out.push_back({t0 + i * d, t0 + (i + 1) * d});
  return out;
}

std::vector<LedKeypoint> extract_led_keypoints(const FrequencyMap& map,
                                               const BoundingBox& bbox,
                                               const TargetSpec& spec,
                                               double tol_hz) {
  const int x0 = std::max(0, int(std::lround(bbox.min.x())));
  const int y0 = std::max(0, int(std::lround(bbox.min.y())));
  const int x1 = std::min(map.width - 1, int(std::lround(bbox.max.x())));
  const int y1 = std::min(map.height - 1, int(std::lround(bbox.max.y())));
  const int bw = x1 - x0 + 1;
  const int bh = y1 - y0 + 1;

  std::vector<LedKeypoint> keypoints;
  std::vector<int> missing;
  std::vector<uint8_t> mask;
  for (int corner = 0; corner < kNumLeds; ++corner) {
    const double nominal = spec.led_frequencies_hz[size_t(corner)];
    mask.assign(size_t(std::max(bw, 0)) * size_t(std::max(bh, 0)), 0);
    std::vector<Point2> mask_pixels;
    double freq_sum = 0;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double v = map.at(x, y);
        if (v == 0.0 || std::abs(v - nominal) > tol_hz) continue;
        mask[size_t(y - y0) * bw + (x - x0)] = 1;
        mask_pixels.emplace_back(x, y);
        freq_sum += v;
      }
    }
    if (mask_pixels.empty()) {
      missing.push_back(corner);
      continue;
    }

    // Boundary = mask pixel with at least one non-mask 8-neighbour
    // (outside the box counts as non-mask).
    std::vector<Point2> boundary;
    for (const Point2& p : mask_pixels) {
      int mx = int(p.x()) - x0, my = int(p.y()) - y0;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          if (dx == 0 && dy == 0) continue;
          int nx = mx + dx, ny = my + dy;
          if (nx < 0 || nx >= bw || ny < 0 || ny >= bh || !mask[size_t(ny) * bw + nx])
            edge = true;
        }
      }
      if (edge) boundary.push_back(p);
    }

    LedKeypoint kp;
    kp.corner_index = corner;
    kp.frequency_hz = freq_sum / double(mask_pixels.size());
    bool fitted = false;
    try {
      kp.ellipse = fit_ellipse(boundary);
      kp.center = kp.ellipse.center;
      fitted = true;
    } catch (const CalibError& e) {
      if (e.code() != Errc::TooFewPoints && e.code() != Errc::DegenerateConfiguration) throw;
    }
    if (!fitted) {
      if (mask_pixels.size() < 3) {
        missing.push_back(corner);
        continue;
      }
      Point2 centroid = Point2::Zero();
      for (const Point2& p : mask_pixels) centroid += p;
      kp.center = centroid / double(mask_pixels.size());
      kp.degraded = true;
    }
    keypoints.push_back(kp);
  }

  if (keypoints.size() < 4) {
    std::string msg = "only " + std::to_string(keypoints.size()) +
                      " LEDs detected (need 4); missing corners:";
    for (int c : missing) msg += " " + std::to_string(c);
    throw CalibError(Errc::MissingLeds, msg);
  }
  return keypoints;
}

}  // namespace calibcube
