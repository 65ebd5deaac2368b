#include "rhythm/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "rhythm/error.hpp"
#include "rhythm/store.hpp"

namespace rhythm {

namespace {

double bump(double h, double centre, double width) {
  double d = std::fabs(h - centre);
  d = std::min(d, 24.0 - d);  // wrap around midnight
  return std::exp(-d * d / (2.0 * width * width));
}

double raw_rate(RhythmTemplate shape, int slot) {
  const int day = slot / 24;  // 0 = Monday
  const double h = slot % 24;
  const bool weekend = day >= 5;
  switch (shape) {
    case RhythmTemplate::day_peak:
      return 0.1 + (weekend ? 0.15 : 1.0) * bump(h, 13.0, 2.0);
    case RhythmTemplate::night_peak:
      return 0.1 + (day >= 4 ? 1.0 : 0.15) * bump(h, 1.0, 2.0);
    case RhythmTemplate::bimodal:
      return 0.1 + bump(h, 7.0, 1.2) + bump(h, 19.0, 1.2);
    case RhythmTemplate::flat_core:
      return 0.5 + (day == 4 || day == 5 ? 1.5 : 1.0) * bump(h, 20.0, 4.0);
    case RhythmTemplate::commuter:
      return 0.1 + (weekend ? 0.6 * bump(h, 12.0, 3.0)
                            : bump(h, 7.5, 1.2) + 0.8 * bump(h, 17.5, 1.5));
  }
  return 1.0;
}

using RateTable = std::array<double, kHoursPerWeek>;

const RateTable& rate_table(RhythmTemplate shape) {
  static const std::array<RateTable, 5> tables = [] {
    std::array<RateTable, 5> t{};
    for (int s = 0; s < 5; ++s) {
      double sum = 0.0;
      for (int slot = 0; slot < kHoursPerWeek; ++slot) {
        t[static_cast<std::size_t>(s)][static_cast<std::size_t>(slot)] =
            raw_rate(static_cast<RhythmTemplate>(s), slot);
        sum += t[static_cast<std::size_t>(s)][static_cast<std::size_t>(slot)];
      }
      for (auto& v : t[static_cast<std::size_t>(s)]) v *= kHoursPerWeek / sum;
    }
    return t;
  }();
  return tables[static_cast<std::size_t>(shape)];
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Grid {
  int cols = 1;
  double cell = 0.01;
  double lon0 = 0.0;
  double lat0 = 0.0;
};

Grid grid_of(const SyntheticCity& c) {
  Grid g;
  g.cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(c.zones)))));
  g.cell = c.cell_deg;
  g.lon0 = c.origin_lon;
  g.lat0 = c.origin_lat;
  return g;
}

// Per-zone hourly counts over the local study window; shared by the event
// generator and planted_items so both see identical draws.
template <typename OnHour>
void draw_counts(const SyntheticCity& c, int zone, OnHour&& on_hour) {
  const RhythmTemplate shape = c.templates[static_cast<std::size_t>(zone) % c.templates.size()];
  std::mt19937_64 intensity_rng(mix(c.seed, 0x1000 + static_cast<std::uint64_t>(zone)));
  const double intensity = 0.5 + unit(intensity_rng);
  std::mt19937_64 rng(mix(c.seed, static_cast<std::uint64_t>(zone)));
  const Timestamp local_start = c.start_utc + c.utc_offset * kSecondsPerHour;
  const Timestamp local_end = local_start + c.weeks * kSecondsPerWeek;
  for (Timestamp h = local_start; h < local_end; h += kSecondsPerHour) {
    const int slot = hour_of_week(h);
    const double lambda = c.events_per_hour * intensity * rate_table(shape)[static_cast<std::size_t>(slot)];
    std::poisson_distribution<int> poisson(lambda);
    on_hour(h, poisson(rng));
  }
}

void check_config(const SyntheticCity& c) {
  if (c.zones < 1) throw ConfigError("synthetic city needs at least one zone");
  if (c.templates.empty()) throw ConfigError("synthetic city needs at least one template");
  if (c.weeks < 1) throw ConfigError("synthetic window must span at least one week");
}

}  // namespace

double template_rate(RhythmTemplate shape, int slot) noexcept {
  return rate_table(shape)[static_cast<std::size_t>(((slot % kHoursPerWeek) + kHoursPerWeek) %
                                                     kHoursPerWeek)];
}

SyntheticData generate_city(const SyntheticCity& c) {
  check_config(c);
  SyntheticData data;
  const Grid g = grid_of(c);
  const int rows = (c.zones + g.cols - 1) / g.cols;
  for (int i = 0; i < c.zones; ++i) {
    const double x0 = g.lon0 + (i % g.cols) * g.cell;
    const double y0 = g.lat0 + (i / g.cols) * g.cell;
    Ring ring{{x0, y0}, {x0 + g.cell, y0}, {x0 + g.cell, y0 + g.cell}, {x0, y0 + g.cell}, {x0, y0}};
    const std::string id = fmt::format("z{:03d}", i);
    data.zones.push_back(make_zone(id, c.city, fmt::format("Zone {}", i), {std::move(ring)}));
    data.planted.push_back(i % static_cast<int>(c.templates.size()));
  }
  data.bbox = {g.lon0 - 2 * g.cell, g.lat0 - 2 * g.cell, g.lon0 + (g.cols + 2) * g.cell,
               g.lat0 + (rows + 2) * g.cell};
  data.window_utc = {c.start_utc, c.start_utc + c.weeks * kSecondsPerWeek};

  for (int i = 0; i < c.zones; ++i) {
    const Zone& z = data.zones[static_cast<std::size_t>(i)];
    std::mt19937_64 place(mix(c.seed, 0x2000 + static_cast<std::uint64_t>(i)));
    int serial = 0;
    draw_counts(c, i, [&](Timestamp local_hour, int n) {
      for (int e = 0; e < n; ++e) {
        GeoEvent ev;
        ev.event_id = fmt::format("{}-{:06d}", z.zone_id, serial++);
        ev.ts_utc = local_hour + static_cast<Timestamp>(place() % 3600) - c.utc_offset * kSecondsPerHour;
        ev.lon = z.bbox.min_lon + g.cell * (0.1 + 0.8 * unit(place));
        ev.lat = z.bbox.min_lat + g.cell * (0.1 + 0.8 * unit(place));
        data.events.push_back(std::move(ev));
      }
    });
  }
  std::sort(data.events.begin(), data.events.end(), [](const GeoEvent& a, const GeoEvent& b) {
    return a.ts_utc != b.ts_utc ? a.ts_utc < b.ts_utc : a.event_id < b.event_id;
  });

  std::mt19937_64 junk(mix(c.seed, 0x3000));
  auto ts_text = [](Timestamp ts) { return format_timestamp(ts) + "Z"; };
  auto mid_window = [&] {
    return data.window_utc.start +
           static_cast<Timestamp>(junk() % static_cast<std::uint64_t>(data.window_utc.end -
                                                                      data.window_utc.start));
  };
  for (int i = 0; i < c.outside_zone_events; ++i) {
    // Inside the bbox margin, west of the grid.
    const double lon = g.lon0 - g.cell * (0.2 + 1.5 * unit(junk));
    const double lat = g.lat0 + g.cell * rows * unit(junk);
    data.extra_lines.push_back(fmt::format(R"({{"id":"nz-{}","ts":"{}","lon":{},"lat":{}}})", i,
                                           ts_text(mid_window()), detail::format_double(lon),
                                           detail::format_double(lat)));
  }
  for (int i = 0; i < c.malformed_lines; ++i) {
    data.extra_lines.push_back(i % 2 == 0 ? fmt::format(R"({{"id":"bad-{}","ts":"not a time")", i)
                                          : fmt::format(R"({{"id":"bad-{}","lon":1.0}})", i));
  }
  for (int i = 0; i < c.out_of_range_lines; ++i) {
    data.extra_lines.push_back(fmt::format(R"({{"id":"oor-{}","ts":"{}","lon":{},"lat":95.0}})", i,
                                           ts_text(mid_window()),
                                           detail::format_double(g.lon0 + 0.5 * g.cell)));
  }
  for (int i = 0; i < c.outside_window_events; ++i) {
    const Timestamp ts = data.window_utc.start - 3600 * (1 + static_cast<Timestamp>(junk() % 48));
    data.extra_lines.push_back(fmt::format(R"({{"id":"ow-{}","ts":"{}","lon":{},"lat":{}}})", i,
                                           ts_text(ts), detail::format_double(g.lon0 + 0.5 * g.cell),
                                           detail::format_double(g.lat0 + 0.5 * g.cell)));
  }
  return data;
}

std::vector<Item> planted_items(const SyntheticCity& c, std::vector<int>* planted) {
  check_config(c);
  std::vector<Item> items;
  if (planted != nullptr) planted->clear();
  const TimeWindow local{c.start_utc + c.utc_offset * kSecondsPerHour,
                         c.start_utc + c.utc_offset * kSecondsPerHour + c.weeks * kSecondsPerWeek};
  for (int i = 0; i < c.zones; ++i) {
    SlotCounts counts(local);
    draw_counts(c, i, [&](Timestamp local_hour, int n) {
      if (n > 0) counts.add_slot(hour_of_week(local_hour), n);
    });
    const WeeklySignature norm = z_normalize(counts.finalize(fmt::format("z{:03d}", i)));
    items.push_back({norm.region_id, {norm.values.begin(), norm.values.end()}});
    if (planted != nullptr) planted->push_back(i % static_cast<int>(c.templates.size()));
  }
  return items;
}

std::string zones_to_geojson(const std::vector<Zone>& zones, const std::string& id_key) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  auto& features = doc["features"];
  features = nlohmann::ordered_json::array();
  for (const auto& z : zones) {
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    for (const auto& ring : z.rings) {
      nlohmann::ordered_json r = nlohmann::ordered_json::array();
      for (const auto& p : ring) r.push_back({p.lon, p.lat});
      coords.push_back(std::move(r));
    }
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{id_key, z.zone_id}, {"name", z.name}};
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", std::move(coords)}};
    features.push_back(std::move(f));
  }
  return doc.dump() + "\n";
}

std::string events_to_jsonl(const SyntheticData& data) {
  std::string out;
  for (const auto& ev : data.events) {
    out += fmt::format(R"({{"id":"{}","ts":"{}Z","lon":{},"lat":{}}})", ev.event_id,
                       format_timestamp(ev.ts_utc), detail::format_double(ev.lon),
                       detail::format_double(ev.lat));
    out += '\n';
  }
  for (const auto& line : data.extra_lines) {
    out += line;
    out += '\n';
  }
  return out;
}

void write_synthetic_fixture(const std::filesystem::path& dir,
                             const std::vector<SyntheticCity>& cities, std::uint64_t seed,
                             const std::vector<int>& k, const std::string& scope) {
  if (cities.empty()) throw ConfigError("fixture needs at least one city");
  nlohmann::ordered_json manifest;
  manifest["_note"] = "synthetic planted-rhythm fixture";
  manifest["cities"] = nlohmann::ordered_json::array();
  for (const auto& c : cities) {
    const SyntheticData data = generate_city(c);
    const std::string zones_name = c.city + "_zones.geojson";
    const std::string events_name = c.city + "_events.jsonl";
    write_text_file(dir / zones_name, zones_to_geojson(data.zones));
    write_text_file(dir / events_name, events_to_jsonl(data));
    manifest["cities"].push_back({{"name", c.city},
                                  {"events", events_name},
                                  {"zones", zones_name},
                                  {"bbox", {data.bbox.sw_lon, data.bbox.sw_lat, data.bbox.ne_lon,
                                            data.bbox.ne_lat}},
                                  {"utc_offset", c.utc_offset}});
  }
  const SyntheticCity& first = cities.front();
  manifest["study_window"] = {format_timestamp(first.start_utc) + "Z",
                              format_timestamp(first.start_utc + first.weeks * kSecondsPerWeek) + "Z"};
  manifest["dtw_window"] = 4;
  manifest["k"] = k;
  manifest["k_range"] = {1, 10};
  manifest["seed"] = seed;
  manifest["centroid_mode"] = "dba";
  manifest["min_events"] = 50;
  manifest["restarts"] = 5;
  manifest["mode"] = scope;
  manifest["output_dir"] = "out";
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace rhythm
