#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rhythm {

/// Geographic coordinate in degrees. Treated as planar for containment.
struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Closed ring: first point equals last point, at least 4 points.
using Ring = std::vector<LonLat>;

struct BBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  [[nodiscard]] bool contains(double lon, double lat) const noexcept {
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// An administrative division. `rings` holds every ring of every polygon part
/// (outer rings and holes alike); containment uses the even-odd rule over all
/// of them.
struct Zone {
  std::string zone_id;
  std::string city;
  std::string name;
  std::vector<Ring> rings;
  BBox bbox;
};

/// Tight bounding box of all ring vertices. Rings must be non-empty.
[[nodiscard]] BBox compute_bbox(std::span<const Ring> rings);

/// Build a validated zone. Throws GeometryError if any ring is unclosed or has
/// fewer than 4 points.
[[nodiscard]] Zone make_zone(std::string zone_id, std::string city, std::string name,
                             std::vector<Ring> rings);

/// Points closer than this to a ring edge count as on the boundary.
inline constexpr double kBoundaryEpsilon = 1e-12;

/// Even-odd containment; boundary points are inside.
[[nodiscard]] bool contains(const Zone& zone, double lon, double lat) noexcept;

/// Parse a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
/// Each feature becomes one zone keyed by the `id_key` property.
[[nodiscard]] std::vector<Zone> parse_zones(std::string_view geojson, const std::string& city,
                                            const std::string& id_key = "zone_id");

/// Read and parse a zones file; IoError if unreadable.
[[nodiscard]] std::vector<Zone> load_zones(const std::filesystem::path& path,
                                           const std::string& city,
                                           const std::string& id_key = "zone_id");

/// Immutable uniform-grid index over zone bounding boxes. Zones are kept in
/// ascending zone_id order regardless of construction order, so lookups are
/// deterministic; the index is safe to share between threads.
class ZoneIndex {
 public:
  ZoneIndex() = default;
  /// Throws SchemaError on duplicate zone ids.
  explicit ZoneIndex(std::vector<Zone> zones);

  /// Zones whose bbox contains the point, ascending zone_id. A superset of
  /// the zones whose polygon contains it.
  [[nodiscard]] std::vector<const Zone*> candidates(double lon, double lat) const;

  /// Lowest-id zone containing the point, if any.
  [[nodiscard]] const Zone* assign(double lon, double lat) const;

  [[nodiscard]] std::span<const Zone> zones() const noexcept { return zones_; }
  [[nodiscard]] const Zone* find(std::string_view zone_id) const;
  [[nodiscard]] std::size_t size() const noexcept { return zones_.size(); }

 private:
  [[nodiscard]] std::optional<std::size_t> cell_of(double lon, double lat) const noexcept;

  std::vector<Zone> zones_;
  BBox extent_{};
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  double cell_w_ = 0.0;
  double cell_h_ = 0.0;
  // Per cell: indices into zones_, ascending (hence ascending zone_id).
  std::vector<std::vector<std::size_t>> cells_;
};

/// Convenience wrapper: zone_id of the lowest-id containing zone.
[[nodiscard]] std::optional<std::string> assign_zone(const ZoneIndex& index, double lon,
                                                     double lat);

}  // namespace rhythm
