#include "calibcube/events.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "calibcube/error.hpp"

namespace calibcube {
namespace {

constexpr size_t kEvbRecordSize = 2 + 2 + 8 + 1;

std::string extension_of(const std::string& path) {
  size_t dot = path.find_last_of('.');
  size_t sep = path.find_last_of('/');
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep)) return "";
  return path.substr(dot);
}

[[noreturn]] void parse_fail(const std::string& path, size_t line, const std::string& what) {
  throw CalibError(Errc::ParseError, path + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_int(const char* begin, const char* end, const std::string& path, size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) parse_fail(path, line, "bad integer field");
  return value;
}

void check_polarity(int p, const std::string& path, size_t line) {
  if (p != 1 && p != -1) parse_fail(path, line, "polarity must be +1 or -1");
}

std::vector<Event> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,t_us,polarity") parse_fail(path, 1, "expected header x,y,t_us,polarity");

  std::vector<Event> events;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    const char* fields[4];
    size_t lens[4];
    for (int f = 0; f < 4; ++f) {
      const char* comma = static_cast<const char*>(std::memchr(p, ',', static_cast<size_t>(end - p)));
      if (f < 3) {
        if (!comma) parse_fail(path, lineno, "expected 4 fields");
        fields[f] = p;
        lens[f] = static_cast<size_t>(comma - p);
        p = comma + 1;
      } else {
        if (comma) parse_fail(path, lineno, "expected 4 fields");
        fields[f] = p;
        lens[f] = static_cast<size_t>(end - p);
      }
    }
    Event e;
    e.x = parse_int<int32_t>(fields[0], fields[0] + lens[0], path, lineno);
    e.y = parse_int<int32_t>(fields[1], fields[1] + lens[1], path, lineno);
    e.t_us = parse_int<int64_t>(fields[2], fields[2] + lens[2], path, lineno);
    int pol = parse_int<int>(fields[3], fields[3] + lens[3], path, lineno);
    check_polarity(pol, path, lineno);
    if (e.x < 0 || e.y < 0) parse_fail(path, lineno, "negative pixel coordinate");
    e.polarity = static_cast<int8_t>(pol);
    events.push_back(e);
  }
  return events;
}

std::vector<Event> read_evb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % kEvbRecordSize != 0)
    throw CalibError(Errc::ParseError, path + ": size is not a multiple of the 13-byte record");
  size_t n = bytes.size() / kEvbRecordSize;
  std::vector<Event> events;
  events.reserve(n);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (size_t i = 0; i < n; ++i, p += kEvbRecordSize) {
    Event e;
    e.x = p[0] | (p[1] << 8);
    e.y = p[2] | (p[3] << 8);
    uint64_t t = 0;
    for (int b = 7; b >= 0; --b) t = (t << 8) | p[4 + b];
    e.t_us = static_cast<int64_t>(t);
    int pol = static_cast<int8_t>(p[12]);
    check_polarity(pol, path, i + 1);
    e.polarity = static_cast<int8_t>(pol);
    events.push_back(e);
  }
  return events;
}

}  // namespace

std::vector<Event> read_events(const std::string& path) {
  std::string ext = extension_of(path);
  std::vector<Event> events;
  if (ext == ".csv")
    events = read_csv(path);
  else if (ext == ".evb")
    events = read_evb(path);
  else
    throw CalibError(Errc::ParseError, path + ": unsupported event file extension '" + ext + "'");
  std::sort(events.begin(), events.end(), event_order);
  return events;
}

void write_events(const std::vector<Event>& events, const std::string& path) {
  std::string ext = extension_of(path);
  if (ext == ".csv") {
    std::ostringstream out;
    out << "x,y,t_us,polarity\n";
    for (const Event& e : events)
      out << e.x << ',' << e.y << ',' << e.t_us << ',' << int(e.polarity) << '\n';
    std::ofstream file(path, std::ios::binary);
    if (!file) throw CalibError(Errc::IoError, "cannot write " + path);
    file << out.str();
  } else if (ext == ".evb") {
    std::string bytes;
    bytes.reserve(events.size() * kEvbRecordSize);
    for (const Event& e : events) {
      if (e.x < 0 || e.x > 0xffff || e.y < 0 || e.y > 0xffff)
        throw CalibError(Errc::IoError, path + ": coordinates do not fit the u16 record field");
      unsigned char rec[kEvbRecordSize];
      rec[0] = static_cast<unsigned char>(e.x & 0xff);
      rec[1] = static_cast<unsigned char>((e.x >> 8) & 0xff);
      rec[2] = static_cast<unsigned char>(e.y & 0xff);
      rec[3] = static_cast<unsigned char>((e.y >> 8) & 0xff);
      uint64_t t = static_cast<uint64_t>(e.t_us);
      for (int b = 0; b < 8; ++b) rec[4 + b] = static_cast<unsigned char>((t >> (8 * b)) & 0xff);
      rec[12] = static_cast<unsigned char>(e.polarity);
      bytes.append(reinterpret_cast<const char*>(rec), kEvbRecordSize);
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw CalibError(Errc::IoError, "cannot write " + path);
    file << bytes;
  } else {
    throw CalibError(Errc::IoError, path + ": unsupported event file extension '" + ext + "'");
  }
}

}  // namespace calibcube
