#include "rhythm/ingest.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>

#include <fmt/format.h>
#include <json.hpp>

#include "rhythm/error.hpp"

namespace rhythm {

namespace {

constexpr Timestamp kSecondsPerDay = 86400;

Timestamp floor_div(Timestamp a, Timestamp b) noexcept {
  Timestamp q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = first + len;
  for (const char* p = first; p != last; ++p) {
    if (*p < '0' || *p > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 19) return std::nullopt;
  if (!read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) || text[7] != '-' ||
      !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  Timestamp offset = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = 0, om = 0;
      if (!read_int(text, pos + 1, 2, oh)) return std::nullopt;
      std::size_t next = pos + 3;
      if (next < text.size() && text[next] == ':') ++next;
      if (next < text.size()) {
        if (!read_int(text, next, 2, om)) return std::nullopt;
        next += 2;
      }
      if (oh > 23 || om > 59) return std::nullopt;
      offset = (c == '+' ? 1 : -1) * (oh * kSecondsPerHour + om * 60);
      pos = next;
    } else {
      return std::nullopt;
    }
  }
  if (pos != text.size()) return std::nullopt;

  const Timestamp days = sys_days{ymd}.time_since_epoch().count();
  return days * kSecondsPerDay + h * kSecondsPerHour + mi * 60 + s - offset;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const Timestamp days = floor_div(ts, kSecondsPerDay);
  const Timestamp rem = ts - days * kSecondsPerDay;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     rem / kSecondsPerHour, (rem % kSecondsPerHour) / 60, rem % 60);
}

int hour_of_week(Timestamp ts) noexcept {
  // 1970-01-01 was a Thursday: day 0 of the epoch is weekday 3 with Monday = 0.
  const Timestamp days = floor_div(ts, kSecondsPerDay);
  const auto dow = static_cast<int>(((days + 3) % 7 + 7) % 7);
  const auto hour = static_cast<int>((ts - days * kSecondsPerDay) / kSecondsPerHour);
  return dow * 24 + hour;
}

LocalTime localize(Timestamp ts_utc, int utc_offset_hours) {
  if (utc_offset_hours < kMinUtcOffset || utc_offset_hours > kMaxUtcOffset) {
    throw ConfigError(fmt::format("utc offset {} outside [{}, {}]", utc_offset_hours,
                                  kMinUtcOffset, kMaxUtcOffset));
  }
  const Timestamp local = ts_utc + utc_offset_hours * kSecondsPerHour;
  return {local, hour_of_week(local)};
}

std::optional<GeoEvent> parse_event_line(std::string_view line) {
  auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object()) return std::nullopt;

  GeoEvent ev;
  const auto id = doc.find("id");
  if (id == doc.end()) return std::nullopt;
  if (id->is_string()) {
    ev.event_id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    ev.event_id = std::to_string(id->get<long long>());
  } else {
    return std::nullopt;
  }
  if (ev.event_id.empty()) return std::nullopt;

  const auto ts = doc.find("ts");
  if (ts == doc.end() || !ts->is_string()) return std::nullopt;
  const auto parsed = parse_timestamp(ts->get_ref<const std::string&>());
  if (!parsed) return std::nullopt;
  ev.ts_utc = *parsed;

  const auto lon = doc.find("lon");
  const auto lat = doc.find("lat");
  if (lon == doc.end() || lat == doc.end() || !lon->is_number() || !lat->is_number()) {
    return std::nullopt;
  }
  ev.lon = lon->get<double>();
  ev.lat = lat->get<double>();
  if (!std::isfinite(ev.lon) || !std::isfinite(ev.lat) || ev.lon < -180.0 || ev.lon > 180.0 ||
      ev.lat < -90.0 || ev.lat > 90.0) {
    return std::nullopt;
  }
  return ev;
}

ParseStats read_events(std::istream& in, const std::function<void(GeoEvent&&)>& sink) {
  ParseStats stats;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++stats.lines;
    if (auto ev = parse_event_line(line)) {
      sink(std::move(*ev));
    } else {
      ++stats.skipped;
    }
  }
  return stats;
}

EventBatch parse_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read events file '{}'", path.string()));
  EventBatch batch;
  batch.stats = read_events(in, [&](GeoEvent&& ev) { batch.events.push_back(std::move(ev)); });
  return batch;
}

void GeoBox::validate() const {
  if (!(sw_lon < ne_lon) || !(sw_lat < ne_lat)) {
    throw ConfigError(fmt::format("bbox southwest corner ({}, {}) is not strictly southwest of "
                                  "northeast corner ({}, {})",
                                  sw_lon, sw_lat, ne_lon, ne_lat));
  }
}

GeoBox parse_geobox(std::string_view text) {
  double v[4];
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t end = i < 3 ? text.find(',', pos) : text.size();
    if (end == std::string_view::npos) {
      throw ConfigError(fmt::format("bbox '{}' must be sw_lon,sw_lat,ne_lon,ne_lat", text));
    }
    std::string part(text.substr(pos, end - pos));
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("bbox component '{}' is not a number", part));
    }
    pos = end + 1;
  }
  GeoBox box{v[0], v[1], v[2], v[3]};
  box.validate();
  return box;
}

std::vector<GeoEvent> filter_bbox(const std::vector<GeoEvent>& events, const GeoBox& box) {
  box.validate();
  std::vector<GeoEvent> kept;
  for (const auto& ev : events) {
    if (box.contains(ev.lon, ev.lat)) kept.push_back(ev);
  }
  return kept;
}

JoinStats& JoinStats::operator+=(const JoinStats& other) noexcept {
  input += other.input;
  joined += other.joined;
  dropped_invalid += other.dropped_invalid;
  dropped_outside_window += other.dropped_outside_window;
  dropped_outside_bbox += other.dropped_outside_bbox;
  dropped_no_zone += other.dropped_no_zone;
  return *this;
}

JoinResult zone_join(const std::vector<GeoEvent>& events, const ZoneIndex& index,
                     int utc_offset_hours) {
  JoinResult result;
  for (const auto& ev : events) {
    ++result.stats.input;
    const Zone* zone = index.assign(ev.lon, ev.lat);
    if (zone == nullptr) {
      ++result.stats.dropped_no_zone;
      continue;
    }
    const LocalTime lt = localize(ev.ts_utc, utc_offset_hours);
    result.events.push_back({ev.event_id, zone->zone_id, lt.slot, lt.local_ts});
    ++result.stats.joined;
  }
  return result;
}

JoinResult ingest_file(const std::filesystem::path& events_path, const ZoneIndex& index,
                       const IngestOptions& options) {
  options.bbox.validate();
  (void)localize(0, options.utc_offset_hours);

  std::ifstream in(events_path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read events file '{}'", events_path.string()));

  JoinResult result;
  const ParseStats parsed = read_events(in, [&](GeoEvent&& ev) {
    if (options.window && !options.window->contains(ev.ts_utc)) {
      ++result.stats.dropped_outside_window;
      return;
    }
    if (!options.bbox.contains(ev.lon, ev.lat)) {
      ++result.stats.dropped_outside_bbox;
      return;
    }
    const Zone* zone = index.assign(ev.lon, ev.lat);
    if (zone == nullptr) {
      ++result.stats.dropped_no_zone;
      return;
    }
    const LocalTime lt = localize(ev.ts_utc, options.utc_offset_hours);
    result.events.push_back({std::move(ev.event_id), zone->zone_id, lt.slot, lt.local_ts});
    ++result.stats.joined;
  });
  result.stats.input = parsed.lines;
  result.stats.dropped_invalid = parsed.skipped;
  return result;
}

}  // namespace rhythm
