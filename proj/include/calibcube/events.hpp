#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace calibcube {

// One DVS event. Timestamps are microseconds; polarity is +1 or -1.
struct Event {
  int32_t x = 0;
  int32_t y = 0;
  int64_t t_us = 0;
  int8_t polarity = 1;
};

// Total order used everywhere events are sorted; ties cannot survive it.
inline bool event_order(const Event& a, const Event& b) {
  if (a.t_us != b.t_us) return a.t_us < b.t_us;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.polarity < b.polarity;
}

// Reads .csv ("x,y,t_us,polarity" header) or .evb (packed little-endian
// u16 x, u16 y, u64 t_us, i8 polarity records). Format picked by extension.
// The returned stream is sorted by event_order.
std::vector<Event> read_events(const std::string& path);

// Writes in the format implied by the extension. .evb requires coordinates
// to fit u16.
void write_events(const std::vector<Event>& events, const std::string& path);

}  // namespace calibcube
