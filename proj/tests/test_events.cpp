#include <doctest.h>

#include <cstdint>
#include <fstream>

#include "calibcube/error.hpp"
#include "calibcube/events.hpp"
#include "helpers.hpp"

using namespace calibcube;

namespace {

bool same_events(const std::vector<Event>& a, const std::vector<Event>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x || a[i].y != b[i].y || a[i].t_us != b[i].t_us ||
        a[i].polarity != b[i].polarity)
      return false;
  }
  return true;
}

std::vector<Event> sample_stream() {
  return {
      {3, 7, 100, 1},
      {3, 7, 150, -1},
      {640, 480, 150, 1},
      {0, 0, 99999999, -1},
  };
}

}  // namespace

TEST_SUITE_BEGIN("events");

TEST_CASE("csv round trip") {
  test::TempDir dir("events");
  auto events = sample_stream();
  write_events(events, dir.file("s.csv"));
  CHECK(same_events(read_events(dir.file("s.csv")), events));
}

TEST_CASE("evb round trip") {
  test::TempDir dir("events");
  auto events = sample_stream();
  write_events(events, dir.file("s.evb"));
  CHECK(same_events(read_events(dir.file("s.evb")), events));
}

TEST_CASE("evb byte layout is 13-byte little-endian records") {
  test::TempDir dir("events");
  std::vector<Event> one = {{0x0201, 0x0403, 0x1122334455667788LL, -1}};
  write_events(one, dir.file("one.evb"));
  auto bytes = test::read_bytes(dir.file("one.evb"));
  REQUIRE(bytes.size() == 13);
  const unsigned char expect[13] = {0x01, 0x02, 0x03, 0x04, 0x88, 0x77, 0x66,
                                    0x55, 0x44, 0x33, 0x22, 0x11, 0xff};
  for (size_t i = 0; i < 13; ++i)
    CHECK(static_cast<unsigned char>(bytes[i]) == expect[i]);
}

TEST_CASE("ingestion sorts by time then position") {
  test::TempDir dir("events");
  std::vector<Event> shuffled = {
      {9, 9, 500, 1}, {1, 1, 100, -1}, {2, 0, 500, 1}, {1, 1, 100, 1}};
  write_events(shuffled, dir.file("s.csv"));
  auto loaded = read_events(dir.file("s.csv"));
  REQUIRE(loaded.size() == 4);
  for (size_t i = 1; i < loaded.size(); ++i)
    CHECK(!event_order(loaded[i], loaded[i - 1]));
  CHECK(loaded[0].polarity == -1);  // (100,1,1,-1) before (100,1,1,+1)
  CHECK(loaded[2].x == 2);          // y breaks the t tie before x
}

TEST_CASE("rejects malformed inputs") {
  test::TempDir dir("events");

  test::write_text(dir.file("hdr.csv"), "x,y,t,p\n1,1,1,1\n");
  CHECK_THROWS_AS(read_events(dir.file("hdr.csv")), CalibError);

  test::write_text(dir.file("pol.csv"), "x,y,t_us,polarity\n1,1,1,0\n");
  try {
    read_events(dir.file("pol.csv"));
    FAIL("expected ParseError");
  } catch (const CalibError& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  test::write_text(dir.file("fields.csv"), "x,y,t_us,polarity\n1,1,1\n");
  CHECK_THROWS_AS(read_events(dir.file("fields.csv")), CalibError);

  test::write_text(dir.file("neg.csv"), "x,y,t_us,polarity\n-1,1,1,1\n");
  CHECK_THROWS_AS(read_events(dir.file("neg.csv")), CalibError);

  test::write_text(dir.file("trunc.evb"), std::string(20, '\0'));
  CHECK_THROWS_AS(read_events(dir.file("trunc.evb")), CalibError);

  CHECK_THROWS_AS(read_events(dir.file("s.parquet")), CalibError);
  CHECK_THROWS_AS(read_events(dir.file("absent.csv")), CalibError);
}

TEST_CASE("evb write rejects coordinates beyond u16") {
  test::TempDir dir("events");
  std::vector<Event> wide = {{70000, 0, 0, 1}};
  CHECK_THROWS_AS(write_events(wide, dir.file("w.evb")), CalibError);
  write_events(wide, dir.file("w.csv"));  // csv has no such limit
  CHECK(read_events(dir.file("w.csv"))[0].x == 70000);
}

TEST_SUITE_END();
