#include "rhythm/pipeline.hpp"

#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "rhythm/error.hpp"
#include "rhythm/report.hpp"

namespace rhythm {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

fs::path OutputLayout::zoned_events(const std::string& city) const {
  return city_dir(city) / "zoned_events.csv";
}
fs::path OutputLayout::ingest_stats(const std::string& city) const {
  return city_dir(city) / "ingest_stats.json";
}
fs::path OutputLayout::signatures_csv(const std::string& city) const {
  return city_dir(city) / "signatures.csv";
}
fs::path OutputLayout::signatures_sidecar(const std::string& city) const {
  return city_dir(city) / "signatures.json";
}
fs::path OutputLayout::model(const std::string& scope, int k) const {
  return scope_dir(scope) / fmt::format("model_k{}.json", k);
}
fs::path OutputLayout::choropleth(const std::string& scope, const std::string& city, int k) const {
  if (scope == city) return scope_dir(scope) / fmt::format("choropleth_k{}.geojson", k);
  return scope_dir(scope) / fmt::format("choropleth_{}_k{}.geojson", city, k);
}
fs::path OutputLayout::kscan(const std::string& scope) const { return scope_dir(scope) / "kscan.csv"; }
fs::path OutputLayout::centroids(const std::string& scope, int k) const {
  return scope_dir(scope) / fmt::format("centroids_k{}.csv", k);
}

Provenance provenance_of(const RunManifest& manifest) {
  return {manifest_hash(manifest), manifest.seed};
}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", stage, e.what()));
  }
}

ojson stats_json(const JoinStats& s) {
  ojson j;
  j["input"] = s.input;
  j["joined"] = s.joined;
  j["dropped_invalid"] = s.dropped_invalid;
  j["dropped_outside_window"] = s.dropped_outside_window;
  j["dropped_outside_bbox"] = s.dropped_outside_bbox;
  j["dropped_no_zone"] = s.dropped_no_zone;
  j["conserved"] = s.conserved();
  return j;
}

TimeWindow local_window_of(const RunManifest& m, const CityConfig& city) {
  return m.study_window.shifted(city.utc_offset * kSecondsPerHour);
}

ClusterConfig cluster_config(const RunManifest& m, int k) {
  ClusterConfig cfg;
  cfg.k = k;
  cfg.seed = m.seed;
  cfg.window = m.dtw_window;
  cfg.mode = m.centroid_mode;
  cfg.init = m.init;
  cfg.max_iters = m.max_iters;
  cfg.threads = m.threads;
  return cfg;
}

SignatureStore read_store(const OutputLayout& layout, const std::string& city) {
  return read_signature_store(layout.signatures_csv(city), layout.signatures_sidecar(city));
}

struct Scope {
  std::string name;
  std::vector<std::string> cities;
  std::vector<Item> items;
};

std::vector<Scope> scopes_of(const RunManifest& m, const OutputLayout& layout) {
  std::vector<Scope> scopes;
  if (m.scope == ClusterScope::independent) {
    for (const auto& city : m.cities) {
      scopes.push_back({city.name, {city.name}, clustering_items(read_store(layout, city.name))});
    }
  } else {
    std::vector<std::pair<std::string, std::vector<Item>>> per_city;
    Scope pooled{"transversal", {}, {}};
    for (const auto& city : m.cities) {
      per_city.emplace_back(city.name, clustering_items(read_store(layout, city.name)));
      pooled.cities.push_back(city.name);
    }
    pooled.items = transversal_pool(per_city);
    scopes.push_back(std::move(pooled));
  }
  return scopes;
}

void write_choropleths(const RunManifest& m, const OutputLayout& layout, const std::string& scope,
                       const std::vector<std::string>& cities, const ClusterModel& model,
                       const Provenance& prov) {
  for (const auto& name : cities) {
    const CityConfig& city = m.city(name);
    std::map<std::string, int> assignments;
    const std::string prefix = name + "/";
    for (std::size_t i = 0; i < model.ids.size(); ++i) {
      const std::string& id = model.ids[i];
      if (scope == name) {
        assignments.emplace(id, model.labels[i]);
      } else if (id.compare(0, prefix.size(), prefix) == 0) {
        assignments.emplace(id.substr(prefix.size()), model.labels[i]);
      }
    }
    const std::string zones = read_text_file(m.resolve(city.zones));
    write_text_file(layout.choropleth(scope, name, model.k),
                    choropleth_geojson(zones, city.id_key, assignments, prov, model.k));
  }
}

}  // namespace

std::vector<CityIngestReport> cmd_ingest(const RunManifest& m) {
  return in_stage("ingest", [&] {
    validate_manifest(m, /*check_inputs=*/true);
    const OutputLayout layout{m.output_path()};
    const Provenance prov = provenance_of(m);
    std::vector<CityIngestReport> reports;
    for (const auto& city : m.cities) {
      const ZoneIndex index(load_zones(m.resolve(city.zones), city.name, city.id_key));
      IngestOptions opts;
      opts.bbox = city.bbox;
      opts.window = m.study_window;
      opts.utc_offset_hours = city.utc_offset;
      JoinResult joined = ingest_file(m.resolve(city.events), index, opts);
      if (!joined.stats.conserved()) {
        throw InternalError(fmt::format("event counts for '{}' do not balance", city.name));
      }
      write_zoned_events(layout.zoned_events(city.name), joined.events, prov);
      ojson stats;
      stats["manifest_hash"] = prov.manifest_hash;
      stats["seed"] = prov.seed;
      stats["city"] = city.name;
      stats["stats"] = stats_json(joined.stats);
      write_text_file(layout.ingest_stats(city.name), stats.dump(2) + "\n");
      reports.push_back({city.name, joined.stats, layout.zoned_events(city.name)});
    }
    return reports;
  });
}

std::string ingest_summary_json(const std::vector<CityIngestReport>& reports,
                                const Provenance& provenance) {
  ojson doc;
  doc["manifest_hash"] = provenance.manifest_hash;
  doc["seed"] = provenance.seed;
  JoinStats total;
  ojson cities = ojson::object();
  for (const auto& r : reports) {
    cities[r.city] = stats_json(r.stats);
    total += r.stats;
  }
  doc["cities"] = std::move(cities);
  doc["total"] = stats_json(total);
  return doc.dump(2);
}

SignatureStore build_signature_store(const std::string& city, int utc_offset,
                                     const std::vector<Zone>& zones,
                                     const std::vector<ZonedEvent>& events,
                                     TimeWindow local_window, int min_events,
                                     bool exclude_constant) {
  SignatureStore store;
  store.city = city;
  store.utc_offset_hours = utc_offset;
  store.local_window = local_window;
  store.min_events = min_events;

  std::map<std::string, SlotCounts> per_zone;
  for (const auto& z : zones) {
    if (z.zone_id == city) {
      throw DataError(fmt::format("zone id '{}' collides with the city aggregate id", z.zone_id));
    }
    per_zone.emplace(z.zone_id, SlotCounts(local_window));
  }
  SlotCounts city_counts(local_window);
  for (const auto& ev : events) {
    const auto it = per_zone.find(ev.zone_id);
    if (it == per_zone.end()) {
      throw DataError(fmt::format("event '{}' references unknown zone '{}'", ev.event_id, ev.zone_id));
    }
    it->second.add(ev.local_ts);
    city_counts.add(ev.local_ts);
  }

  auto add_region = [&](const std::string& id, const SlotCounts& counts, RegionKind kind,
                        const WeeklySignature* city_norm) {
    const WeeklySignature raw = counts.finalize(id);
    const WeeklySignature norm = z_normalize(raw);
    SeasonalDecomposition dec = seasonal_residual(norm);
    auto& variants = store.signatures[id];
    variants[SignatureVariant::raw] = raw;
    variants[SignatureVariant::normalized] = norm;
    variants[SignatureVariant::residual_seasonal] = dec.residual;
    variants[SignatureVariant::residual_vs_city] =
        residual_vs_city(norm, city_norm != nullptr ? *city_norm : norm);

    RegionMeta meta;
    meta.kind = kind;
    meta.weeks_observed = raw.weeks_observed;
    meta.total_events = raw.total_events;
    meta.constant = norm.constant;
    meta.seasonal = dec.seasonal;
    if (kind == RegionKind::zone) {
      if (raw.total_events < min_events) {
        meta.excluded = true;
        meta.exclusion_reason = fmt::format("total_events {} < min_events {}", raw.total_events, min_events);
      } else if (exclude_constant && norm.constant) {
        meta.excluded = true;
        meta.exclusion_reason = "constant signature";
      }
    }
    store.meta[id] = std::move(meta);
    store.regions.push_back(id);
  };

  const WeeklySignature city_norm = z_normalize(city_counts.finalize(city));
  for (const auto& [zone_id, counts] : per_zone) {
    add_region(zone_id, counts, RegionKind::zone, &city_norm);
  }
  add_region(city, city_counts, RegionKind::city, nullptr);
  return store;
}

std::vector<CitySignatureReport> cmd_signatures(const RunManifest& m) {
  return in_stage("signatures", [&] {
    validate_manifest(m, false);
    const OutputLayout layout{m.output_path()};
    const Provenance prov = provenance_of(m);
    std::vector<CitySignatureReport> reports;
    for (const auto& city : m.cities) {
      const auto zones = load_zones(m.resolve(city.zones), city.name, city.id_key);
      const auto events = read_zoned_events(layout.zoned_events(city.name));
      const SignatureStore store =
          build_signature_store(city.name, city.utc_offset, zones, events,
                                local_window_of(m, city), m.min_events, m.exclude_constant);
      write_signature_store(layout.signatures_csv(city.name), layout.signatures_sidecar(city.name),
                            store, prov);
      CitySignatureReport report{city.name, zones.size(), 0};
      for (const auto& [_, meta] : store.meta) report.excluded += meta.excluded ? 1 : 0;
      reports.push_back(report);
    }
    return reports;
  });
}

std::vector<Item> clustering_items(const SignatureStore& store) {
  std::vector<Item> items;
  for (const auto& region : store.regions) {
    const RegionMeta& meta = store.meta.at(region);
    if (meta.kind != RegionKind::zone || meta.excluded) continue;
    const auto& sig = store.get(region, SignatureVariant::normalized);
    items.push_back({region, {sig.values.begin(), sig.values.end()}});
  }
  return items;
}

std::vector<fs::path> cmd_cluster(const RunManifest& m) {
  return in_stage("cluster", [&] {
    validate_manifest(m, false);
    const OutputLayout layout{m.output_path()};
    const Provenance prov = provenance_of(m);
    std::vector<fs::path> written;
    for (const Scope& scope : scopes_of(m, layout)) {
      const int max_k = *std::max_element(m.k.begin(), m.k.end());
      if (static_cast<std::size_t>(max_k) > scope.items.size()) {
        throw DataError(fmt::format("k = {} exceeds the {} usable zones in '{}'", max_k,
                                    scope.items.size(), scope.name));
      }
      const PairwiseDistances distances(scope.items, m.dtw_window, m.threads);
      for (int k : m.k) {
        const ClusterModel model = fit(scope.items, cluster_config(m, k), m.restarts, &distances);
        const ModelContext ctx{prov, std::string(to_string(m.scope)), scope.cities};
        write_text_file(layout.model(scope.name, k), model_to_json(model, ctx));
        write_choropleths(m, layout, scope.name, scope.cities, model, prov);
        written.push_back(layout.model(scope.name, k));
      }
    }
    return written;
  });
}

std::vector<ScopeScan> cmd_kscan(const RunManifest& m) {
  return in_stage("kscan", [&] {
    validate_manifest(m, false);
    const OutputLayout layout{m.output_path()};
    const Provenance prov = provenance_of(m);
    std::vector<ScopeScan> scans;
    for (const Scope& scope : scopes_of(m, layout)) {
      KScanResult result = k_scan(scope.items, cluster_config(m, 1), m.k_scan_last, m.restarts,
                                  m.f_threshold);
      write_text_file(layout.kscan(scope.name), kscan_csv(result, prov));
      scans.push_back({scope.name, std::move(result), layout.kscan(scope.name)});
    }
    return scans;
  });
}

namespace {

std::vector<int> read_recommended(const fs::path& kscan_path) {
  std::vector<int> rec;
  std::istringstream in(read_text_file(kscan_path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
    const auto fields = detail::csv_split(line);
    if (fields.size() == 4 && fields[3] == "true") {
      rec.push_back(static_cast<int>(detail::parse_integer(fields[0], "k")));
    }
  }
  return rec;
}

}  // namespace

fs::path cmd_report(const RunManifest& m) {
  return in_stage("report", [&] {
    validate_manifest(m, false);
    const OutputLayout layout{m.output_path()};
    const Provenance prov = provenance_of(m);

    ojson doc;
    doc["manifest_hash"] = prov.manifest_hash;
    doc["seed"] = prov.seed;
    doc["mode"] = std::string(to_string(m.scope));
    doc["dtw_window"] = m.dtw_window.to_string();

    ojson cities = ojson::object();
    for (const auto& city : m.cities) {
      ojson c;
      if (fs::exists(layout.ingest_stats(city.name))) {
        c["ingest"] = ojson::parse(read_text_file(layout.ingest_stats(city.name)))["stats"];
      }
      const SignatureStore store = read_store(layout, city.name);
      std::size_t zones = 0;
      ojson excluded = ojson::array();
      for (const auto& region : store.regions) {
        const RegionMeta& meta = store.meta.at(region);
        if (meta.kind != RegionKind::zone) continue;
        ++zones;
        if (meta.excluded) excluded.push_back({{"zone_id", region}, {"reason", meta.exclusion_reason}});
      }
      c["zones"] = zones;
      c["excluded"] = std::move(excluded);
      c["total_events"] = store.meta.at(city.name).total_events;

      // Typical daily signatures of the city aggregate.
      std::string daily = fmt::format("# manifest_hash={} seed={}\nregion_id,variant,day,hour,value\n",
                                      prov.manifest_hash, prov.seed);
      for (SignatureVariant v : {SignatureVariant::raw, SignatureVariant::normalized}) {
        for (const auto& d : daily_signatures(store.get(city.name, v))) {
          for (std::size_t h = 0; h < d.values.size(); ++h) {
            daily += fmt::format("{},{},{},{},{}\n", detail::csv_escape(city.name), to_string(v),
                                 d.day, h, detail::format_double(d.values[h]));
          }
        }
      }
      write_text_file(layout.city_dir(city.name) / "daily_signatures.csv", daily);
      cities[city.name] = std::move(c);
    }
    doc["cities"] = std::move(cities);

    std::vector<std::pair<std::string, std::vector<std::string>>> scopes;
    if (m.scope == ClusterScope::independent) {
      for (const auto& city : m.cities) scopes.push_back({city.name, {city.name}});
    } else {
      std::vector<std::string> names;
      for (const auto& city : m.cities) names.push_back(city.name);
      scopes.push_back({"transversal", names});
    }

    ojson models = ojson::array();
    ojson scans = ojson::array();
    for (const auto& [scope, scope_cities] : scopes) {
      for (int k : m.k) {
        const fs::path path = layout.model(scope, k);
        const LoadedModel loaded = model_from_json(read_text_file(path));
        const ClusterModel& model = loaded.model;
        write_choropleths(m, layout, scope, scope_cities, model, prov);

        std::string csv = fmt::format("# manifest_hash={} seed={}\ncluster,day,hour,value\n",
                                      prov.manifest_hash, prov.seed);
        ojson clusters = ojson::array();
        for (int c = 0; c < model.k; ++c) {
          const auto& centroid = model.centroids[static_cast<std::size_t>(c)];
          for (std::size_t t = 0; t < centroid.size(); ++t) {
            csv += fmt::format("{},{},{},{}\n", c, t / 24, t % 24, detail::format_double(centroid[t]));
          }
          ojson members = ojson::array();
          for (std::size_t i = 0; i < model.ids.size(); ++i) {
            if (model.labels[i] == c) members.push_back(model.ids[i]);
          }
          clusters.push_back({{"cluster", c}, {"size", members.size()}, {"members", members}});
        }
        write_text_file(layout.centroids(scope, k), csv);
        models.push_back({{"scope", scope},
                          {"k", k},
                          {"file", fs::relative(path, layout.root).generic_string()},
                          {"distortion", model.distortion},
                          {"iterations_run", model.iterations_run},
                          {"converged", model.converged},
                          {"clusters", std::move(clusters)}});
      }
      if (fs::exists(layout.kscan(scope))) {
        scans.push_back({{"scope", scope}, {"recommended", read_recommended(layout.kscan(scope))}});
      }
    }
    doc["models"] = std::move(models);
    doc["kscan"] = std::move(scans);
    write_text_file(layout.report(), doc.dump(2) + "\n");
    return layout.report();
  });
}

void cmd_run(const RunManifest& m) {
  (void)cmd_ingest(m);
  (void)cmd_signatures(m);
  (void)cmd_kscan(m);
  (void)cmd_cluster(m);
  (void)cmd_report(m);
}

}  // namespace rhythm
