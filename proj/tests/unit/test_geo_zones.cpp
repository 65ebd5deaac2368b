#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>

#include "oracles.hpp"
#include "rhythm/error.hpp"
#include "rhythm/geo_zones.hpp"

using namespace rhythm;

namespace {

std::string square_feature(const std::string& id, double x0, double y0, double side) {
  const auto n = [](double v) { return std::to_string(v); };
  return R"({"type":"Feature","properties":{"zone_id":")" + id +
         R"("},"geometry":{"type":"Polygon","coordinates":[[[)" + n(x0) + "," + n(y0) + "],[" +
         n(x0 + side) + "," + n(y0) + "],[" + n(x0 + side) + "," + n(y0 + side) + "],[" + n(x0) +
         "," + n(y0 + side) + "],[" + n(x0) + "," + n(y0) + "]]]}}";
}

std::string collection(const std::vector<std::string>& features) {
  std::string out = R"({"type":"FeatureCollection","features":[)";
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += ",";
    out += features[i];
  }
  return out + "]}";
}

Ring unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}; }

// L shape: the unit-2 square with the top-right quadrant removed.
Ring l_shape() { return {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}, {0, 0}}; }

}  // namespace

TEST_SUITE("geo_zones") {
  TEST_CASE("two squares parse into two zones with tight bboxes") {
    const auto zones =
        parse_zones(collection({square_feature("a", 0, 0, 1), square_feature("b", 2, 3, 0.5)}),
                    "c");
    REQUIRE(zones.size() == 2);
    CHECK(zones[0].zone_id == "a");
    CHECK(zones[0].city == "c");
    CHECK(zones[0].bbox == BBox{0, 0, 1, 1});
    CHECK(zones[1].bbox == BBox{2, 3, 2.5, 3.5});
  }

  TEST_CASE("duplicate zone ids are rejected") {
    CHECK_THROWS_AS(
        (void)parse_zones(collection({square_feature("a", 0, 0, 1), square_feature("a", 2, 0, 1)}),
                          "c"),
        SchemaError);
  }

  TEST_CASE("malformed features report their index") {
    const std::string bad = R"({"type":"Feature","properties":{"zone_id":"x"},"geometry":{"type":"Point","coordinates":[0,0]}})";
    try {
      (void)parse_zones(collection({square_feature("a", 0, 0, 1), bad}), "c");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.index() == 1);
    }
    CHECK_THROWS_AS((void)parse_zones("{not json", "c"), ParseError);
    CHECK_THROWS_AS((void)parse_zones(R"({"type":"Feature"})", "c"), DataError);
  }

  TEST_CASE("missing id property is a schema error") {
    const std::string f = R"({"type":"Feature","properties":{"name":"n"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}})";
    CHECK_THROWS_AS((void)parse_zones(collection({f}), "c"), SchemaError);
  }

  TEST_CASE("custom id key") {
    const std::string f = R"({"type":"Feature","properties":{"code":"E09"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}})";
    const auto zones = parse_zones(collection({f}), "london", "code");
    REQUIRE(zones.size() == 1);
    CHECK(zones[0].zone_id == "E09");
  }

  TEST_CASE("multipolygon becomes one zone") {
    const std::string f = R"({"type":"Feature","properties":{"zone_id":"m"},"geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,5]]]]}})";
    const auto zones = parse_zones(collection({f}), "c");
    REQUIRE(zones.size() == 1);
    CHECK(zones[0].rings.size() == 2);
    CHECK(zones[0].bbox == BBox{0, 0, 6, 6});
    CHECK(contains(zones[0], 5.8, 5.2));
    CHECK_FALSE(contains(zones[0], 3, 3));
  }

  TEST_CASE("ring validation") {
    CHECK_THROWS_AS((void)make_zone("z", "c", "", {{{0, 0}, {1, 0}, {0, 0}}}), GeometryError);
    CHECK_THROWS_AS((void)make_zone("z", "c", "", {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}),
                    GeometryError);
    CHECK_NOTHROW((void)make_zone("z", "c", "", {unit_square()}));
  }

  TEST_CASE("unit square containment") {
    const Zone z = make_zone("z", "c", "", {unit_square()});
    CHECK(contains(z, 0.5, 0.5));
    CHECK_FALSE(contains(z, 1.5, 0.5));
    CHECK(contains(z, 0.0, 0.5));  // boundary counts as inside
    CHECK(contains(z, 1.0, 1.0));
  }

  TEST_CASE("concave notch agrees with the winding oracle") {
    const Ring ring = l_shape();
    const Zone z = make_zone("l", "c", "", {ring});
    CHECK_FALSE(contains(z, 1.5, 1.5));
    CHECK_FALSE(oracle::inside_by_winding(ring, 1.5, 1.5));
    CHECK(contains(z, 0.5, 1.5));
    CHECK(oracle::inside_by_winding(ring, 0.5, 1.5));
  }

  TEST_CASE("holes are excluded by the even-odd rule") {
    const Ring outer{{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}};
    const Ring hole{{1, 1}, {3, 1}, {3, 3}, {1, 3}, {1, 1}};
    const Zone z = make_zone("h", "c", "", {outer, hole});
    CHECK_FALSE(contains(z, 2, 2));
    CHECK(contains(z, 0.5, 2));
  }

  TEST_CASE("random points match the winding oracle away from edges") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    int compared = 0;
    for (int poly = 0; poly < 50; ++poly) {
      const Ring ring = oracle::random_star_polygon(rng, 3 + poly % 12);
      const Zone z = make_zone("p", "c", "", {ring});
      for (int t = 0; t < 200; ++t) {
        const double x = u(rng);
        const double y = u(rng);
        if (oracle::ring_distance(ring, x, y) <= 1e-12) continue;
        REQUIRE(contains(z, x, y) == oracle::inside_by_winding(ring, x, y));
        ++compared;
      }
    }
    CHECK(compared > 9900);
  }

  TEST_CASE("inside implies inside bbox") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int poly = 0; poly < 20; ++poly) {
      const Zone z = make_zone("p", "c", "", {oracle::random_star_polygon(rng, 8)});
      for (int t = 0; t < 200; ++t) {
        const double x = u(rng);
        const double y = u(rng);
        if (contains(z, x, y)) CHECK(z.bbox.contains(x, y));
      }
    }
  }

  TEST_CASE("index assigns inside, outside and shared borders") {
    ZoneIndex index({make_zone("B", "c", "", {{{1, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 0}}}),
                     make_zone("A", "c", "", {unit_square()})});
    CHECK(assign_zone(index, 0.5, 0.5) == "A");
    CHECK(assign_zone(index, 1.5, 0.5) == "B");
    CHECK_FALSE(assign_zone(index, 5, 5).has_value());
    // Both zones contain the shared edge; the lower id wins.
    CHECK(contains(*index.find("A"), 1.0, 0.5));
    CHECK(contains(*index.find("B"), 1.0, 0.5));
    CHECK(assign_zone(index, 1.0, 0.5) == "A");
    CHECK(index.find("nope") == nullptr);
  }

  TEST_CASE("index rejects duplicate ids") {
    CHECK_THROWS_AS(ZoneIndex({make_zone("A", "c", "", {unit_square()}),
                               make_zone("A", "c", "", {unit_square()})}),
                    SchemaError);
  }

  TEST_CASE("index lookups do not depend on construction order") {
    std::vector<Zone> zones;
    for (int i = 0; i < 25; ++i) {
      const double x = i % 5;
      const double y = i / 5;
      zones.push_back(make_zone("z" + std::to_string(100 + i), "c", "",
                                {{{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}}}));
    }
    auto shuffled = zones;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const ZoneIndex a(zones);
    const ZoneIndex b(shuffled);
    std::uniform_real_distribution<double> u(-0.5, 5.5);
    for (int t = 0; t < 2000; ++t) {
      // Snap half the probes onto grid lines to exercise shared borders.
      double x = u(rng);
      double y = u(rng);
      if (t % 2) x = std::round(x);
      CHECK(assign_zone(a, x, y) == assign_zone(b, x, y));
    }
  }

  TEST_CASE("candidates are a superset of containing zones") {
    std::mt19937_64 rng(8);
    std::vector<Zone> zones;
    for (int i = 0; i < 30; ++i) {
      Ring r = oracle::random_star_polygon(rng, 6);
      const double dx = (i % 6) * 1.5;
      const double dy = (i / 6) * 1.5;
      for (auto& p : r) {
        p.lon += dx;
        p.lat += dy;
      }
      zones.push_back(make_zone("z" + std::to_string(10 + i), "c", "", {r}));
    }
    const ZoneIndex index(zones);
    std::uniform_real_distribution<double> u(-1.5, 9.5);
    for (int t = 0; t < 3000; ++t) {
      const double x = u(rng);
      const double y = u(rng);
      const auto cand = index.candidates(x, y);
      for (const Zone& z : index.zones()) {
        if (contains(z, x, y)) {
          CHECK(std::find(cand.begin(), cand.end(), &z) != cand.end());
        }
      }
    }
  }

  TEST_CASE("missing zones file is an io error naming the path") {
    try {
      (void)load_zones("/nonexistent/zones.geojson", "c");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/zones.geojson") != std::string::npos);
    }
  }
}
