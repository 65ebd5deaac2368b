#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rhythm/clustering.hpp"
#include "rhythm/geo_zones.hpp"
#include "rhythm/ingest.hpp"
#include "rhythm/signatures.hpp"

namespace rhythm {

/// Diurnal shapes used to plant known cluster structure.
enum class RhythmTemplate { day_peak, night_peak, bimodal, flat_core, commuter };

/// Expected activity for one hour-of-week slot, scaled to mean ~1.
[[nodiscard]] double template_rate(RhythmTemplate shape, int slot) noexcept;

struct SyntheticCity {
  std::string city = "synth";
  int zones = 60;
  std::vector<RhythmTemplate> templates{RhythmTemplate::day_peak, RhythmTemplate::night_peak,
                                        RhythmTemplate::bimodal};
  std::uint64_t seed = 7;
  Timestamp start_utc = 1451865600;  // 2016-01-04T00:00:00Z, a Monday
  int weeks = 4;
  int utc_offset = 0;
  double events_per_hour = 15.0;  // mean per zone before the per-zone intensity factor
  double origin_lon = 10.0;
  double origin_lat = 40.0;
  double cell_deg = 0.01;
  // Extra lines that exercise ingestion drop paths.
  int outside_zone_events = 0;
  int malformed_lines = 0;
  int out_of_range_lines = 0;
  int outside_window_events = 0;
};

struct SyntheticData {
  std::vector<Zone> zones;          // grid cells, ids z000, z001, ...
  std::vector<int> planted;         // template index per zone
  std::vector<GeoEvent> events;     // valid events, sorted by time then id
  std::vector<std::string> extra_lines;  // junk / out-of-range JSONL lines
  GeoBox bbox;
  TimeWindow window_utc;
};

/// Zones on a square grid; each zone draws Poisson(rate * intensity) events per
/// hour from its planted template, with intensity uniform in [0.5, 1.5].
[[nodiscard]] SyntheticData generate_city(const SyntheticCity& config);

/// Planted normalized signatures without going through files: per zone, the
/// z-normalized TWS of its Poisson counts. Item ids match zone ids.
[[nodiscard]] std::vector<Item> planted_items(const SyntheticCity& config,
                                              std::vector<int>* planted = nullptr);

[[nodiscard]] std::string zones_to_geojson(const std::vector<Zone>& zones,
                                           const std::string& id_key = "zone_id");
[[nodiscard]] std::string events_to_jsonl(const SyntheticData& data);

/// Write `<dir>/<city>_zones.geojson`, `<dir>/<city>_events.jsonl` and a
/// manifest `<dir>/manifest.json` covering all given cities.
void write_synthetic_fixture(const std::filesystem::path& dir,
                             const std::vector<SyntheticCity>& cities, std::uint64_t seed,
                             const std::vector<int>& k, const std::string& scope);

}  // namespace rhythm
