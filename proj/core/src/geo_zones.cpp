#include "rhythm/geo_zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rhythm/error.hpp"

namespace rhythm {

using nlohmann::json;

BBox compute_bbox(std::span<const Ring> rings) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BBox box{inf, inf, -inf, -inf};
  for (const auto& ring : rings) {
    for (const auto& p : ring) {
      box.min_lon = std::min(box.min_lon, p.lon);
      box.min_lat = std::min(box.min_lat, p.lat);
      box.max_lon = std::max(box.max_lon, p.lon);
      box.max_lat = std::max(box.max_lat, p.lat);
    }
  }
  return box;
}

Zone make_zone(std::string zone_id, std::string city, std::string name,
               std::vector<Ring> rings) {
  if (rings.empty()) {
    throw GeometryError(fmt::format("zone '{}' has no rings", zone_id));
  }
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const auto& ring = rings[r];
    if (ring.size() < 4) {
      throw GeometryError(
          fmt::format("zone '{}' ring {} has {} points (need at least 4)", zone_id, r, ring.size()));
    }
    if (!(ring.front() == ring.back())) {
      throw GeometryError(fmt::format("zone '{}' ring {} is not closed", zone_id, r));
    }
  }
  Zone zone;
  zone.bbox = compute_bbox(rings);
  zone.zone_id = std::move(zone_id);
  zone.city = std::move(city);
  zone.name = std::move(name);
  zone.rings = std::move(rings);
  return zone;
}

namespace {

bool near_segment(const LonLat& a, const LonLat& b, double x, double y) noexcept {
  const double dx = b.lon - a.lon;
  const double dy = b.lat - a.lat;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((x - a.lon) * dx + (y - a.lat) * dy) / len2, 0.0, 1.0);
  }
  const double px = a.lon + t * dx - x;
  const double py = a.lat + t * dy - y;
  return px * px + py * py <= kBoundaryEpsilon * kBoundaryEpsilon;
}

}  // namespace

bool contains(const Zone& zone, double lon, double lat) noexcept {
  if (!zone.bbox.contains(lon, lat)) return false;
  bool inside = false;
  for (const auto& ring : zone.rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const LonLat& a = ring[i];
      const LonLat& b = ring[j];
      if (near_segment(a, b, lon, lat)) return true;
      if ((a.lat > lat) != (b.lat > lat)) {
        const double cross_lon = (b.lon - a.lon) * (lat - a.lat) / (b.lat - a.lat) + a.lon;
        if (lon < cross_lon) inside = !inside;
      }
    }
  }
  return inside;
}

namespace {

std::string id_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) return std::to_string(value.get<unsigned long long>());
  if (value.is_number_float()) return fmt::format("{}", value.get<double>());
  return {};
}

Ring parse_ring(const json& coords, long feature) {
  if (!coords.is_array()) throw ParseError(fmt::format("feature {}: ring is not an array", feature), feature);
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
      throw ParseError(fmt::format("feature {}: invalid coordinate", feature), feature);
    }
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

void append_polygon(const json& polygon, long feature, std::vector<Ring>& rings) {
  if (!polygon.is_array()) {
    throw ParseError(fmt::format("feature {}: polygon is not an array of rings", feature), feature);
  }
  for (const auto& ring : polygon) rings.push_back(parse_ring(ring, feature));
}

}  // namespace

std::vector<Zone> parse_zones(std::string_view geojson, const std::string& city,
                              const std::string& id_key) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed GeoJSON: {}", e.what()));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError("GeoJSON root is not a FeatureCollection with a features array");
  }

  std::vector<Zone> zones;
  std::set<std::string> seen;
  long index = 0;
  for (const auto& feature : doc["features"]) {
    if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object()) {
      throw ParseError(fmt::format("feature {}: missing geometry", index), index);
    }
    const auto& geometry = feature["geometry"];
    const std::string type = geometry.value("type", "");
    if (!geometry.contains("coordinates")) {
      throw ParseError(fmt::format("feature {}: geometry has no coordinates", index), index);
    }
    const auto& coords = geometry["coordinates"];

    const json* props = feature.contains("properties") && feature["properties"].is_object()
                            ? &feature["properties"]
                            : nullptr;
    std::string zone_id;
    if (props != nullptr && props->contains(id_key)) zone_id = id_to_string((*props)[id_key]);
    if (zone_id.empty()) {
      throw SchemaError(fmt::format("feature {}: missing id property '{}'", index, id_key));
    }
    std::string name = zone_id;
    if (props != nullptr && props->contains("name") && (*props)["name"].is_string()) {
      name = (*props)["name"].get<std::string>();
    }

    std::vector<Ring> rings;
    if (type == "Polygon") {
      append_polygon(coords, index, rings);
    } else if (type == "MultiPolygon") {
      if (!coords.is_array()) {
        throw ParseError(fmt::format("feature {}: MultiPolygon coordinates not an array", index), index);
      }
      for (const auto& polygon : coords) append_polygon(polygon, index, rings);
    } else {
      throw ParseError(fmt::format("feature {}: unsupported geometry type '{}'", index, type), index);
    }

    if (!seen.insert(zone_id).second) {
      throw SchemaError(fmt::format("duplicate zone_id '{}' (feature {})", zone_id, index));
    }
    zones.push_back(make_zone(std::move(zone_id), city, std::move(name), std::move(rings)));
    ++index;
  }
  return zones;
}

std::vector<Zone> load_zones(const std::filesystem::path& path, const std::string& city,
                             const std::string& id_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read zones file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_zones(buf.str(), city, id_key);
}

// ---------------------------------------------------------------------------

ZoneIndex::ZoneIndex(std::vector<Zone> zones) : zones_(std::move(zones)) {
  std::sort(zones_.begin(), zones_.end(),
            [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
  for (std::size_t i = 1; i < zones_.size(); ++i) {
    if (zones_[i].zone_id == zones_[i - 1].zone_id) {
      throw SchemaError(fmt::format("duplicate zone_id '{}'", zones_[i].zone_id));
    }
  }
  if (zones_.empty()) return;

  extent_ = zones_.front().bbox;
  for (const auto& z : zones_) {
    extent_.min_lon = std::min(extent_.min_lon, z.bbox.min_lon);
    extent_.min_lat = std::min(extent_.min_lat, z.bbox.min_lat);
    extent_.max_lon = std::max(extent_.max_lon, z.bbox.max_lon);
    extent_.max_lat = std::max(extent_.max_lat, z.bbox.max_lat);
  }
  const auto side = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(zones_.size())))) * 2, 1, 256);
  const double w = extent_.max_lon - extent_.min_lon;
  const double h = extent_.max_lat - extent_.min_lat;
  cols_ = w > 0.0 ? side : 1;
  rows_ = h > 0.0 ? side : 1;
  cell_w_ = w > 0.0 ? w / static_cast<double>(cols_) : 1.0;
  cell_h_ = h > 0.0 ? h / static_cast<double>(rows_) : 1.0;
  cells_.assign(cols_ * rows_, {});

  auto col_of = [&](double lon) {
    return std::min(cols_ - 1, static_cast<std::size_t>((lon - extent_.min_lon) / cell_w_));
  };
  auto row_of = [&](double lat) {
    return std::min(rows_ - 1, static_cast<std::size_t>((lat - extent_.min_lat) / cell_h_));
  };
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    const BBox& b = zones_[i].bbox;
    for (std::size_t r = row_of(b.min_lat); r <= row_of(b.max_lat); ++r) {
      for (std::size_t c = col_of(b.min_lon); c <= col_of(b.max_lon); ++c) {
        cells_[r * cols_ + c].push_back(i);
      }
    }
  }
}

std::optional<std::size_t> ZoneIndex::cell_of(double lon, double lat) const noexcept {
  if (zones_.empty() || !extent_.contains(lon, lat)) return std::nullopt;
  const auto c = std::min(cols_ - 1, static_cast<std::size_t>((lon - extent_.min_lon) / cell_w_));
  const auto r = std::min(rows_ - 1, static_cast<std::size_t>((lat - extent_.min_lat) / cell_h_));
  return r * cols_ + c;
}

std::vector<const Zone*> ZoneIndex::candidates(double lon, double lat) const {
  std::vector<const Zone*> out;
  const auto cell = cell_of(lon, lat);
  if (!cell) return out;
  for (std::size_t i : cells_[*cell]) {
    if (zones_[i].bbox.contains(lon, lat)) out.push_back(&zones_[i]);
  }
  return out;
}

const Zone* ZoneIndex::assign(double lon, double lat) const {
  const auto cell = cell_of(lon, lat);
  if (!cell) return nullptr;
  for (std::size_t i : cells_[*cell]) {
    if (contains(zones_[i], lon, lat)) return &zones_[i];
  }
  return nullptr;
}

const Zone* ZoneIndex::find(std::string_view zone_id) const {
  auto it = std::lower_bound(zones_.begin(), zones_.end(), zone_id,
                             [](const Zone& z, std::string_view id) { return z.zone_id < id; });
  if (it == zones_.end() || it->zone_id != zone_id) return nullptr;
  return &*it;
}

std::optional<std::string> assign_zone(const ZoneIndex& index, double lon, double lat) {
  if (const Zone* z = index.assign(lon, lat)) return z->zone_id;
  return std::nullopt;
}

}  // namespace rhythm
