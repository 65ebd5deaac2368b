#include <doctest.h>

#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "rhythm/error.hpp"
#include "rhythm/ingest.hpp"

using namespace rhythm;

namespace {

constexpr Timestamp kMonday = 1451865600;  // 2016-01-04T00:00:00Z

ParseStats read_all(const std::string& text, std::vector<GeoEvent>& out) {
  std::istringstream in(text);
  return read_events(in, [&](GeoEvent&& e) { out.push_back(std::move(e)); });
}

ZoneIndex two_squares() {
  return ZoneIndex({make_zone("A", "c", "", {{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}}),
                    make_zone("B", "c", "", {{{1, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 0}}})});
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("timestamps") {
    CHECK(parse_timestamp("2016-01-04T00:00:00Z") == kMonday);
    CHECK(parse_timestamp("2016-01-04 00:00:00") == kMonday);
    CHECK(parse_timestamp("2016-01-04T03:00:00+03:00") == kMonday);
    CHECK(parse_timestamp("2016-01-03T19:30:00-04:30") == kMonday);
    CHECK(parse_timestamp("2016-01-04T00:00:00.999Z") == kMonday);
    CHECK_FALSE(parse_timestamp("2016-13-04T00:00:00Z").has_value());
    CHECK_FALSE(parse_timestamp("2016-02-30T00:00:00Z").has_value());
    CHECK_FALSE(parse_timestamp("yesterday").has_value());
    CHECK(format_timestamp(kMonday) == "2016-01-04T00:00:00");
    CHECK(parse_timestamp(format_timestamp(kMonday + 12345)) == kMonday + 12345);
  }

  TEST_CASE("hour of week") {
    CHECK(hour_of_week(kMonday) == 0);
    CHECK(hour_of_week(kMonday + 8 * 3600) == 8);
    CHECK(hour_of_week(kMonday + 24 * 3600 + 8 * 3600) == 32);  // Tuesday 08:00
    CHECK(hour_of_week(kMonday - 3600) == 167);
    CHECK(hour_of_week(kMonday - 1) == 167);
    CHECK(hour_of_week(0) == 3 * 24);  // 1970-01-01 was a Thursday
  }

  TEST_CASE("three valid lines") {
    std::vector<GeoEvent> events;
    const auto stats = read_all(
        "{\"id\":\"1\",\"ts\":\"2016-01-04T00:00:00Z\",\"lon\":0.5,\"lat\":0.5}\n"
        "{\"id\":\"2\",\"ts\":\"2016-01-04T01:00:00Z\",\"lon\":1.5,\"lat\":0.5}\n"
        "{\"id\":\"3\",\"ts\":\"2016-01-04T02:00:00Z\",\"lon\":-3,\"lat\":2}\n",
        events);
    CHECK(events.size() == 3);
    CHECK(stats.lines == 3);
    CHECK(stats.skipped == 0);
    CHECK(events[1].event_id == "2");
    CHECK(events[1].ts_utc == kMonday + 3600);
  }

  TEST_CASE("out of range latitude is skipped and counted") {
    std::vector<GeoEvent> events;
    const auto stats = read_all(
        "{\"id\":\"1\",\"ts\":\"2016-01-04T00:00:00Z\",\"lon\":0.5,\"lat\":95}\n"
        "{\"id\":\"2\",\"ts\":\"2016-01-04T00:00:00Z\",\"lon\":0.5,\"lat\":0.5}\n",
        events);
    CHECK(events.size() == 1);
    CHECK(stats.skipped == 1);
  }

  TEST_CASE("malformed lines never abort the read") {
    std::vector<GeoEvent> events;
    const auto stats = read_all(
        "not json\n"
        "{\"id\":\"1\",\"lon\":0.5,\"lat\":0.5}\n"
        "{\"id\":\"2\",\"ts\":\"bad\",\"lon\":0.5,\"lat\":0.5}\n"
        "{\"id\":\"3\",\"ts\":\"2016-01-04T00:00:00Z\",\"lon\":181,\"lat\":0}\n"
        "[1,2]\n"
        "\n"
        "{\"id\":\"4\",\"ts\":\"2016-01-04T00:00:00Z\",\"lon\":0.5,\"lat\":0.5}\n",
        events);
    CHECK(events.size() == 1);
    CHECK(stats.lines == 6);
    CHECK(stats.skipped == 5);
  }

  TEST_CASE("empty input is an empty stream") {
    std::vector<GeoEvent> events;
    const auto stats = read_all("", events);
    CHECK(events.empty());
    CHECK(stats.lines == 0);
    CHECK(stats.skipped == 0);

    oracle::ScratchDir dir("ingest_empty");
    oracle::write_file(dir / "e.jsonl", "");
    const auto batch = parse_events(dir / "e.jsonl");
    CHECK(batch.events.empty());
    CHECK_THROWS_AS((void)parse_events(dir / "missing.jsonl"), IoError);
  }

  TEST_CASE("bbox filter is a closed interval") {
    const GeoBox box{0, 0, 2, 1};
    std::vector<GeoEvent> events{{"centre", 0, 1.0, 0.5},
                                 {"edge", 0, 2.0, 1.0},
                                 {"corner", 0, 0.0, 0.0},
                                 {"west", 0, -0.01, 0.0}};
    const auto kept = filter_bbox(events, box);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].event_id == "centre");
    CHECK(kept[1].event_id == "edge");
    CHECK(kept[2].event_id == "corner");
  }

  TEST_CASE("bbox validation and parsing") {
    CHECK_THROWS_AS(GeoBox({1, 0, 0, 1}).validate(), ConfigError);
    CHECK_THROWS_AS(GeoBox({0, 1, 1, 1}).validate(), ConfigError);
    const GeoBox b = parse_geobox("51.3,25.1,51.7,25.5");
    CHECK(b.sw_lon == 51.3);
    CHECK(b.ne_lat == 25.5);
    CHECK_THROWS_AS((void)parse_geobox("1,2,3"), ConfigError);
    CHECK_THROWS_AS((void)parse_geobox("a,b,c,d"), ConfigError);
  }

  TEST_CASE("localization") {
    CHECK(localize(kMonday, 0).slot == 0);
    // Sunday 22:00 UTC at +3 is Monday 01:00 local.
    const auto lt = localize(kMonday - 2 * 3600, 3);
    CHECK(lt.slot == 1);
    CHECK(lt.local_ts == kMonday + 3600);
    CHECK(localize(kMonday, -5).slot == 167 - 4);
    CHECK_THROWS_AS((void)localize(kMonday, 15), ConfigError);
    CHECK_THROWS_AS((void)localize(kMonday, -13), ConfigError);
  }

  TEST_CASE("localize round trip over every offset") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<Timestamp> ts(0, 2'000'000'000);
    for (int off = kMinUtcOffset; off <= kMaxUtcOffset; ++off) {
      for (int t = 0; t < 50; ++t) {
        const Timestamp u = ts(rng);
        const auto lt = localize(u, off);
        CHECK(lt.local_ts - off * kSecondsPerHour == u);
        CHECK(lt.slot == hour_of_week(lt.local_ts));
      }
    }
  }

  TEST_CASE("zone join keeps order and counts misses") {
    const auto index = two_squares();
    std::vector<GeoEvent> events{{"1", kMonday, 0.5, 0.5},
                                 {"2", kMonday + 3600, 1.5, 0.5},
                                 {"3", kMonday, 5.0, 5.0},
                                 {"4", kMonday, 1.0, 0.5}};
    const auto r = zone_join(events, index, 0);
    REQUIRE(r.events.size() == 3);
    CHECK(r.events[0].zone_id == "A");
    CHECK(r.events[1].zone_id == "B");
    CHECK(r.events[1].slot == 1);
    CHECK(r.events[2].zone_id == "A");  // shared border
    CHECK(r.stats.input == 4);
    CHECK(r.stats.joined == 3);
    CHECK(r.stats.dropped_no_zone == 1);
    CHECK(r.stats.conserved());
  }

  TEST_CASE("ten-event mixed stream is conserved") {
    oracle::ScratchDir dir("ingest_mixed");
    std::string text;
    auto line = [&](const std::string& id, const std::string& ts, double lon, double lat) {
      text += "{\"id\":\"" + id + "\",\"ts\":\"" + ts + "\",\"lon\":" + std::to_string(lon) +
              ",\"lat\":" + std::to_string(lat) + "}\n";
    };
    line("a1", "2016-01-04T01:00:00Z", 0.5, 0.5);   // joined A
    line("a2", "2016-01-05T01:00:00Z", 0.2, 0.7);   // joined A
    line("b1", "2016-01-06T23:00:00Z", 1.5, 0.5);   // joined B
    line("b2", "2016-01-04T00:00:00Z", 1.9, 0.1);   // joined B, window start
    line("w1", "2016-01-11T00:00:00Z", 0.5, 0.5);   // window end is exclusive
    line("w2", "2016-01-03T23:59:59Z", 0.5, 0.5);   // before window
    line("o1", "2016-01-04T05:00:00Z", 2.5, 0.5);   // outside bbox
    line("n1", "2016-01-04T05:00:00Z", 1.0, 1.5);   // in bbox, no zone
    text += "{\"id\":\"x1\",\"ts\":\"nope\"}\n";     // invalid
    line("x2", "2016-01-04T05:00:00Z", 0.5, -91);   // invalid latitude
    oracle::write_file(dir / "e.jsonl", text);

    IngestOptions opt;
    opt.bbox = {0, 0, 2, 2};
    opt.window = TimeWindow{kMonday, kMonday + kSecondsPerWeek};
    const auto r = ingest_file(dir / "e.jsonl", two_squares(), opt);
    CHECK(r.stats.input == 10);
    CHECK(r.stats.joined == 4);
    CHECK(r.stats.dropped_invalid == 2);
    CHECK(r.stats.dropped_outside_window == 2);
    CHECK(r.stats.dropped_outside_bbox == 1);
    CHECK(r.stats.dropped_no_zone == 1);
    CHECK(r.stats.conserved());
  }

  TEST_CASE("join stats add") {
    JoinStats a{3, 2, 1, 0, 0, 0};
    JoinStats b{4, 1, 0, 1, 1, 1};
    a += b;
    CHECK(a.input == 7);
    CHECK(a.joined == 3);
    CHECK(a.dropped() == 4);
    CHECK(a.conserved());
  }
}
