#include "rhythm/manifest.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "rhythm/error.hpp"
#include "rhythm/store.hpp"

namespace rhythm {

using nlohmann::json;

std::string_view to_string(ClusterScope scope) noexcept {
  return scope == ClusterScope::independent ? "independent" : "transversal";
}

std::filesystem::path RunManifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

const CityConfig& RunManifest::city(std::string_view name) const {
  for (const auto& c : cities) {
    if (c.name == name) return c;
  }
  throw ConfigError(fmt::format("no city named '{}' in manifest", name));
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

Timestamp parse_ts_value(const json& v, std::string_view what) {
  if (!v.is_string()) throw ConfigError(fmt::format("{} must be an ISO-8601 string", what));
  const auto ts = parse_timestamp(v.get<std::string>());
  if (!ts) throw ConfigError(fmt::format("{} '{}' is not ISO-8601", what, v.get<std::string>()));
  return *ts;
}

GeoBox parse_bbox_value(const json& v) {
  if (v.is_string()) return parse_geobox(v.get<std::string>());
  if (!v.is_array() || v.size() != 4) {
    throw ConfigError("bbox must be [sw_lon, sw_lat, ne_lon, ne_lat]");
  }
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("bbox entries must be numbers");
  }
  GeoBox box{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  box.validate();
  return box;
}

WarpWindow parse_window_value(const json& v) {
  if (v.is_null()) return WarpWindow::unbounded();
  if (v.is_string()) return parse_warp_window(v.get<std::string>());
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return WarpWindow::band(static_cast<std::size_t>(v.get<long long>()));
  }
  throw ConfigError("dtw_window must be a non-negative integer or \"unbounded\"");
}

}  // namespace

RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("manifest is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
  reject_unknown(doc,
                 {"cities", "study_window", "dtw_window", "k", "k_range", "seed", "centroid_mode",
                  "init", "min_events", "exclude_constant", "max_iters", "restarts",
                  "f_threshold", "mode", "output_dir", "threads"},
                 "manifest");

  RunManifest m;
  m.base_dir = base_dir.empty() ? std::filesystem::path(".") : base_dir;
  try {
    if (doc.contains("cities")) {
      for (const auto& c : doc.at("cities")) {
        reject_unknown(c, {"name", "events", "zones", "bbox", "utc_offset", "id_key"}, "city");
        CityConfig city;
        city.name = c.at("name").get<std::string>();
        city.events = c.at("events").get<std::string>();
        city.zones = c.at("zones").get<std::string>();
        city.bbox = parse_bbox_value(c.at("bbox"));
        city.utc_offset = c.value("utc_offset", 0);
        city.id_key = c.value("id_key", std::string("zone_id"));
        m.cities.push_back(std::move(city));
      }
    }
    if (doc.contains("study_window")) {
      const auto& w = doc.at("study_window");
      if (w.is_array() && w.size() == 2) {
        m.study_window = {parse_ts_value(w[0], "study_window start"),
                          parse_ts_value(w[1], "study_window end")};
      } else if (w.is_object()) {
        m.study_window = {parse_ts_value(w.at("start"), "study_window start"),
                          parse_ts_value(w.at("end"), "study_window end")};
      } else {
        throw ConfigError("study_window must be [start, end] or {start, end}");
      }
    }
    if (doc.contains("dtw_window")) m.dtw_window = parse_window_value(doc.at("dtw_window"));
    if (doc.contains("k")) {
      const auto& k = doc.at("k");
      m.k.clear();
      if (k.is_array()) {
        for (const auto& v : k) m.k.push_back(v.get<int>());
      } else {
        m.k.push_back(k.get<int>());
      }
    }
    if (doc.contains("k_range")) {
      const auto& r = doc.at("k_range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("k_range must be [first, last]");
      m.k_scan_first = r[0].get<int>();
      m.k_scan_last = r[1].get<int>();
    }
    if (doc.contains("seed")) m.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("centroid_mode")) {
      m.centroid_mode = parse_centroid_mode(doc.at("centroid_mode").get<std::string>());
    }
    if (doc.contains("init")) m.init = parse_init_mode(doc.at("init").get<std::string>());
    m.min_events = doc.value("min_events", m.min_events);
    m.exclude_constant = doc.value("exclude_constant", m.exclude_constant);
    m.max_iters = doc.value("max_iters", m.max_iters);
    m.restarts = doc.value("restarts", m.restarts);
    m.f_threshold = doc.value("f_threshold", m.f_threshold);
    if (doc.contains("mode")) {
      const auto mode = doc.at("mode").get<std::string>();
      if (mode == "independent") {
        m.scope = ClusterScope::independent;
      } else if (mode == "transversal") {
        m.scope = ClusterScope::transversal;
      } else {
        throw ConfigError(fmt::format("mode '{}' must be independent or transversal", mode));
      }
    }
    m.output_dir = doc.value("output_dir", m.output_dir);
    m.threads = doc.value("threads", m.threads);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("manifest: {}", e.what()));
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError(fmt::format("manifest '{}' does not exist", path.string()));
  }
  return parse_manifest(read_text_file(path), path.parent_path());
}

void validate_manifest(const RunManifest& m, bool check_inputs) {
  if (m.cities.empty()) throw ConfigError("manifest lists no cities");
  std::set<std::string> names;
  for (const auto& c : m.cities) {
    if (c.name.empty() || !std::all_of(c.name.begin(), c.name.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
        })) {
      throw ConfigError(fmt::format("city name '{}' must be non-empty [A-Za-z0-9_-]", c.name));
    }
    if (c.name == "transversal") throw ConfigError("'transversal' is reserved as a city name");
    if (!names.insert(c.name).second) throw ConfigError(fmt::format("duplicate city '{}'", c.name));
    c.bbox.validate();
    (void)localize(0, c.utc_offset);
    if (check_inputs) {
      for (const auto* p : {&c.events, &c.zones}) {
        if (!std::filesystem::exists(m.resolve(*p))) {
          throw IoError(fmt::format("city '{}': input '{}' does not exist", c.name,
                                    m.resolve(*p).string()));
        }
      }
    }
  }
  if (m.study_window.end - m.study_window.start < kSecondsPerWeek) {
    throw ConfigError("study_window must span at least one week");
  }
  if (m.k.empty()) throw ConfigError("k must list at least one value");
  for (int k : m.k) {
    if (k < 1) throw ConfigError(fmt::format("k = {} must be positive", k));
  }
  if (m.k_scan_first != 1) {
    throw ConfigError(fmt::format("k scan must start at 1 (got {}): f(K) needs S_1", m.k_scan_first));
  }
  if (m.k_scan_last < 1) throw ConfigError("k scan end must be >= 1");
  if (m.min_events < 0) throw ConfigError("min_events must be non-negative");
  if (m.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (m.restarts < 1) throw ConfigError("restarts must be >= 1");
}

std::string canonical_json(const RunManifest& m) {
  nlohmann::ordered_json doc;
  auto& cities = doc["cities"];
  cities = nlohmann::ordered_json::array();
  for (const auto& c : m.cities) {
    cities.push_back({{"name", c.name},
                      {"events", c.events},
                      {"zones", c.zones},
                      {"bbox",
                       {detail::format_double(c.bbox.sw_lon), detail::format_double(c.bbox.sw_lat),
                        detail::format_double(c.bbox.ne_lon), detail::format_double(c.bbox.ne_lat)}},
                      {"utc_offset", c.utc_offset},
                      {"id_key", c.id_key}});
  }
  doc["study_window"] = {format_timestamp(m.study_window.start),
                         format_timestamp(m.study_window.end)};
  doc["dtw_window"] = m.dtw_window.to_string();
  doc["k"] = m.k;
  doc["k_range"] = {m.k_scan_first, m.k_scan_last};
  doc["seed"] = m.seed;
  doc["centroid_mode"] = to_string(m.centroid_mode);
  doc["init"] = to_string(m.init);
  doc["min_events"] = m.min_events;
  doc["exclude_constant"] = m.exclude_constant;
  doc["max_iters"] = m.max_iters;
  doc["restarts"] = m.restarts;
  doc["f_threshold"] = detail::format_double(m.f_threshold);
  doc["mode"] = to_string(m.scope);
  return doc.dump();
}

std::string manifest_hash(const RunManifest& m) {
  return fmt::format("{:016x}", detail::fnv1a64(canonical_json(m)));
}

}  // namespace rhythm
