#include "rhythm/store.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "rhythm/error.hpp"

namespace rhythm {

using nlohmann::json;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string provenance_line(const Provenance& p) {
  return fmt::format("# manifest_hash={} seed={}\n", p.manifest_hash, p.seed);
}

// Data lines of a CSV file: skips comment lines and checks the header.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path,
                                                    const std::vector<std::string>& header) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool saw_header = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::csv_split(line);
    if (!saw_header) {
      if (fields != header) {
        throw ParseError(fmt::format("{}: unexpected header '{}'", path.string(), line), line_no);
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), line_no,
                                   header.size(), fields.size()),
                       line_no);
    }
    rows.push_back(std::move(fields));
  }
  if (!saw_header) throw ParseError(fmt::format("{}: missing header", path.string()));
  return rows;
}

std::string_view to_string(RegionKind kind) { return kind == RegionKind::zone ? "zone" : "city"; }

}  // namespace

void write_zoned_events(const std::filesystem::path& path, const std::vector<ZonedEvent>& events,
                        const Provenance& provenance) {
  std::string out = provenance_line(provenance);
  out += "event_id,zone_id,slot,local_ts\n";
  for (const auto& ev : events) {
    out += fmt::format("{},{},{},{}\n", detail::csv_escape(ev.event_id),
                       detail::csv_escape(ev.zone_id), ev.slot, format_timestamp(ev.local_ts));
  }
  write_text_file(path, out);
}

std::vector<ZonedEvent> read_zoned_events(const std::filesystem::path& path) {
  std::vector<ZonedEvent> events;
  for (auto& row : read_csv_rows(path, {"event_id", "zone_id", "slot", "local_ts"})) {
    ZonedEvent ev;
    ev.event_id = std::move(row[0]);
    ev.zone_id = std::move(row[1]);
    ev.slot = static_cast<int>(detail::parse_integer(row[2], "slot"));
    const auto ts = parse_timestamp(row[3]);
    if (!ts) throw DataError(fmt::format("{}: bad local_ts '{}'", path.string(), row[3]));
    ev.local_ts = *ts;
    if (ev.slot != hour_of_week(ev.local_ts)) {
      throw DataError(fmt::format("{}: event '{}' slot {} disagrees with local_ts {}",
                                  path.string(), ev.event_id, ev.slot, row[3]));
    }
    events.push_back(std::move(ev));
  }
  return events;
}

const WeeklySignature& SignatureStore::get(const std::string& region,
                                           SignatureVariant variant) const {
  const auto r = signatures.find(region);
  if (r == signatures.end()) throw DataError(fmt::format("no signatures for region '{}'", region));
  const auto v = r->second.find(variant);
  if (v == r->second.end()) {
    throw DataError(fmt::format("region '{}' has no {} signature", region, to_string(variant)));
  }
  return v->second;
}

void write_signature_store(const std::filesystem::path& csv_path,
                           const std::filesystem::path& sidecar_path, const SignatureStore& store,
                           const Provenance& provenance) {
  std::string csv = provenance_line(provenance);
  csv += "region_id,variant,slot,value\n";
  for (const auto& region : store.regions) {
    const auto& variants = store.signatures.at(region);
    for (const auto& [variant, sig] : variants) {
      const std::string id = detail::csv_escape(region);
      const std::string_view name = to_string(variant);
      for (std::size_t s = 0; s < sig.values.size(); ++s) {
        csv += fmt::format("{},{},{},{}\n", id, name, s, detail::format_double(sig.values[s]));
      }
    }
  }
  write_text_file(csv_path, csv);

  nlohmann::ordered_json side;
  side["manifest_hash"] = provenance.manifest_hash;
  side["seed"] = provenance.seed;
  side["city"] = store.city;
  side["utc_offset"] = store.utc_offset_hours;
  side["local_window"] = {format_timestamp(store.local_window.start),
                          format_timestamp(store.local_window.end)};
  side["min_events"] = store.min_events;
  auto& regions = side["regions"];
  regions = nlohmann::ordered_json::array();
  for (const auto& region : store.regions) {
    const RegionMeta& m = store.meta.at(region);
    nlohmann::ordered_json r;
    r["region_id"] = region;
    r["kind"] = to_string(m.kind);
    r["weeks_observed"] = m.weeks_observed;
    r["total_events"] = m.total_events;
    r["constant"] = m.constant;
    r["excluded"] = m.excluded;
    r["exclusion_reason"] = m.exclusion_reason;
    r["seasonal"] = m.seasonal;
    regions.push_back(std::move(r));
  }
  write_text_file(sidecar_path, side.dump(2) + "\n");
}

SignatureStore read_signature_store(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& sidecar_path) {
  SignatureStore store;
  json side;
  try {
    side = json::parse(read_text_file(sidecar_path));
    store.city = side.at("city").get<std::string>();
    store.utc_offset_hours = side.at("utc_offset").get<int>();
    const auto window = side.at("local_window");
    const auto start = parse_timestamp(window.at(0).get<std::string>());
    const auto end = parse_timestamp(window.at(1).get<std::string>());
    if (!start || !end) throw DataError("bad local_window");
    store.local_window = {*start, *end};
    store.min_events = side.at("min_events").get<int>();
    for (const auto& r : side.at("regions")) {
      const std::string id = r.at("region_id").get<std::string>();
      RegionMeta m;
      m.kind = r.at("kind").get<std::string>() == "city" ? RegionKind::city : RegionKind::zone;
      m.weeks_observed = r.at("weeks_observed").get<std::int64_t>();
      m.total_events = r.at("total_events").get<std::int64_t>();
      m.constant = r.at("constant").get<bool>();
      m.excluded = r.at("excluded").get<bool>();
      m.exclusion_reason = r.at("exclusion_reason").get<std::string>();
      m.seasonal = r.at("seasonal").get<DayValues>();
      store.regions.push_back(id);
      store.meta.emplace(id, std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", sidecar_path.string(), e.what()));
  }

  std::map<std::string, std::map<SignatureVariant, std::array<bool, kHoursPerWeek>>> seen;
  for (auto& row : read_csv_rows(csv_path, {"region_id", "variant", "slot", "value"})) {
    const auto meta = store.meta.find(row[0]);
    if (meta == store.meta.end()) {
      throw DataError(fmt::format("{}: region '{}' missing from sidecar", csv_path.string(), row[0]));
    }
    const SignatureVariant variant = parse_variant(row[1]);
    const long long slot = detail::parse_integer(row[2], "slot");
    if (slot < 0 || slot >= kHoursPerWeek) {
      throw DataError(fmt::format("{}: slot {} out of range", csv_path.string(), slot));
    }
    auto& sig = store.signatures[row[0]][variant];
    sig.region_id = row[0];
    sig.variant = variant;
    sig.weeks_observed = meta->second.weeks_observed;
    sig.total_events = meta->second.total_events;
    sig.constant = meta->second.constant;
    sig.values[static_cast<std::size_t>(slot)] = detail::parse_double(row[3], "value");
    seen[row[0]][variant][static_cast<std::size_t>(slot)] = true;
  }
  for (const auto& [region, variants] : seen) {
    for (const auto& [variant, slots] : variants) {
      for (bool present : slots) {
        if (!present) {
          throw DataError(fmt::format("{}: region '{}' {} signature does not have {} slots",
                                      csv_path.string(), region, to_string(variant),
                                      kHoursPerWeek));
        }
      }
    }
  }
  return store;
}

}  // namespace rhythm
