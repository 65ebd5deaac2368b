#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rhythm/geo_zones.hpp"

namespace rhythm {

/// Seconds since 1970-01-01T00:00:00 (UTC, or local wall-clock after a shift).
using Timestamp = std::int64_t;

inline constexpr int kHoursPerWeek = 168;
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerWeek = kHoursPerWeek * kSecondsPerHour;

/// Parse ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fff][Z|±HH:MM]` (a space may replace
/// the `T`). Fractional seconds are truncated; an explicit offset is folded
/// into the result so it is always UTC. Returns nullopt on malformed input.
[[nodiscard]] std::optional<Timestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SS`, no zone designator.
[[nodiscard]] std::string format_timestamp(Timestamp ts);

/// Hour-of-week slot, 0 = Monday 00:00 .. 167 = Sunday 23:00.
[[nodiscard]] int hour_of_week(Timestamp ts) noexcept;

/// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  [[nodiscard]] bool contains(Timestamp ts) const noexcept { return ts >= start && ts < end; }
  [[nodiscard]] TimeWindow shifted(Timestamp seconds) const noexcept {
    return {start + seconds, end + seconds};
  }
};

struct GeoEvent {
  std::string event_id;
  Timestamp ts_utc = 0;
  double lon = 0.0;
  double lat = 0.0;
};

struct ZonedEvent {
  std::string event_id;
  std::string zone_id;
  int slot = 0;
  Timestamp local_ts = 0;
};

struct LocalTime {
  Timestamp local_ts = 0;
  int slot = 0;
};

/// Valid UTC offsets, in whole hours.
inline constexpr int kMinUtcOffset = -12;
inline constexpr int kMaxUtcOffset = 14;

/// Shift to local wall-clock time. Throws ConfigError if the offset is outside
/// [-12, 14].
[[nodiscard]] LocalTime localize(Timestamp ts_utc, int utc_offset_hours);

/// Parse one JSON-Lines record (`id`, `ts`, `lon`, `lat`). Returns nullopt for
/// anything malformed or out of coordinate range.
[[nodiscard]] std::optional<GeoEvent> parse_event_line(std::string_view line);

struct ParseStats {
  std::uint64_t lines = 0;    // non-blank lines seen
  std::uint64_t skipped = 0;  // malformed or invalid lines
};

/// Stream events from a JSONL source. Blank lines are ignored; invalid lines
/// are counted in `skipped` and never abort the read.
ParseStats read_events(std::istream& in, const std::function<void(GeoEvent&&)>& sink);

struct EventBatch {
  std::vector<GeoEvent> events;
  ParseStats stats;
};

/// Read a whole events file. IoError if the file cannot be opened.
[[nodiscard]] EventBatch parse_events(const std::filesystem::path& path);

/// Bounding box given as southwest and northeast corners.
struct GeoBox {
  double sw_lon = 0.0;
  double sw_lat = 0.0;
  double ne_lon = 0.0;
  double ne_lat = 0.0;

  /// Throws ConfigError unless sw is strictly southwest of ne.
  void validate() const;
  [[nodiscard]] bool contains(double lon, double lat) const noexcept {
    return lon >= sw_lon && lon <= ne_lon && lat >= sw_lat && lat <= ne_lat;
  }
};

/// Parse `sw_lon,sw_lat,ne_lon,ne_lat`; ConfigError on bad input.
[[nodiscard]] GeoBox parse_geobox(std::string_view text);

/// Keep events inside the closed bbox. Validates the box first.
[[nodiscard]] std::vector<GeoEvent> filter_bbox(const std::vector<GeoEvent>& events,
                                                const GeoBox& box);

struct JoinStats {
  std::uint64_t input = 0;
  std::uint64_t joined = 0;
  std::uint64_t dropped_invalid = 0;
  std::uint64_t dropped_outside_window = 0;
  std::uint64_t dropped_outside_bbox = 0;
  std::uint64_t dropped_no_zone = 0;

  [[nodiscard]] std::uint64_t dropped() const noexcept {
    return dropped_invalid + dropped_outside_window + dropped_outside_bbox + dropped_no_zone;
  }
  [[nodiscard]] bool conserved() const noexcept { return input == joined + dropped(); }
  JoinStats& operator+=(const JoinStats& other) noexcept;
};

struct JoinResult {
  std::vector<ZonedEvent> events;
  JoinStats stats;
};

/// Map every event to its zone; events outside all zones are counted in
/// `dropped_no_zone`. Output preserves input order.
[[nodiscard]] JoinResult zone_join(const std::vector<GeoEvent>& events, const ZoneIndex& index,
                                   int utc_offset_hours);

struct IngestOptions {
  GeoBox bbox;
  std::optional<TimeWindow> window;  // UTC; events outside are dropped
  int utc_offset_hours = 0;
};

/// Full ingest of one events file: parse, window filter, bbox filter, zone join.
[[nodiscard]] JoinResult ingest_file(const std::filesystem::path& events_path,
                                     const ZoneIndex& index, const IngestOptions& options);

}  // namespace rhythm
