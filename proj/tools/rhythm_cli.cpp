// rhythm: command-line front end for the weekly-signature clustering pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rhythm/error.hpp"
#include "rhythm/manifest.hpp"
#include "rhythm/pipeline.hpp"
#include "rhythm/synthetic.hpp"

namespace {

using rhythm::ConfigError;
using rhythm::RunManifest;

// Flags shared by every pipeline subcommand; each overrides its manifest key.
struct Overrides {
  std::string manifest;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string dtw_window;
  std::vector<int> k;
  std::string k_range;
  std::string mode;
  std::string centroid_mode;
  std::string init;
  std::optional<int> min_events;
  std::optional<int> restarts;
  std::optional<int> max_iters;
  // Single-city flags.
  std::string city;
  std::string events;
  std::string zones;
  std::string id_key;
  std::string bbox;
  std::optional<int> utc_offset;
  std::string window;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-m,--manifest", o.manifest, "Run manifest (JSON)");
  cmd->add_option("-o,--output", o.output, "Output directory");
  cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)");
  cmd->add_option("--dtw-window", o.dtw_window, "Sakoe-Chiba radius in hours, or 'unbounded'");
  cmd->add_option("-k,--k", o.k, "Cluster count(s), e.g. -k 2 -k 5 -k 8");
  cmd->add_option("--k-range", o.k_range, "K scan range first,last (first must be 1)");
  cmd->add_option("--mode", o.mode, "independent | transversal");
  cmd->add_option("--centroid-mode", o.centroid_mode, "dba | medoid");
  cmd->add_option("--init", o.init, "kmeans++ | uniform");
  cmd->add_option("--min-events", o.min_events, "Exclude zones with fewer events");
  cmd->add_option("--restarts", o.restarts, "Seeded restarts per k");
  cmd->add_option("--max-iters", o.max_iters, "k-means iteration cap");
  cmd->add_option("--city", o.city, "City name (single-city runs without a manifest)");
  cmd->add_option("--events", o.events, "Events JSONL file");
  cmd->add_option("--zones", o.zones, "Zones GeoJSON file");
  cmd->add_option("--id-key", o.id_key, "Zone id property key (default zone_id)");
  cmd->add_option("--bbox", o.bbox, "sw_lon,sw_lat,ne_lon,ne_lat");
  cmd->add_option("--utc-offset", o.utc_offset, "Whole-hour UTC offset for local time");
  cmd->add_option("--window", o.window, "Study window start,end (ISO-8601, UTC)");
}

RunManifest effective_manifest(const Overrides& o) {
  RunManifest m;
  if (!o.manifest.empty()) {
    m = rhythm::load_manifest(o.manifest);
  } else {
    m.base_dir = std::filesystem::current_path();
  }

  const bool city_flags = !o.events.empty() || !o.zones.empty() || !o.id_key.empty() ||
                          !o.bbox.empty() || o.utc_offset.has_value() || !o.city.empty();
  if (city_flags) {
    if (m.cities.size() > 1) {
      throw ConfigError("city flags (--events/--zones/--bbox/...) need a single-city manifest");
    }
    if (m.cities.empty()) {
      m.cities.emplace_back();
      m.cities.back().name = "city";
    }
    auto& c = m.cities.front();
    // Flag paths are relative to the working directory, not the manifest.
    auto abs = [](const std::string& p) { return std::filesystem::absolute(p).string(); };
    if (!o.city.empty()) c.name = o.city;
    if (!o.events.empty()) c.events = abs(o.events);
    if (!o.zones.empty()) c.zones = abs(o.zones);
    if (!o.id_key.empty()) c.id_key = o.id_key;
    if (!o.bbox.empty()) c.bbox = rhythm::parse_geobox(o.bbox);
    if (o.utc_offset) c.utc_offset = *o.utc_offset;
  }
  if (!o.window.empty()) {
    const auto comma = o.window.find(',');
    if (comma == std::string::npos) throw ConfigError("--window expects start,end");
    const auto start = rhythm::parse_timestamp(o.window.substr(0, comma));
    const auto end = rhythm::parse_timestamp(o.window.substr(comma + 1));
    if (!start || !end) throw ConfigError(fmt::format("--window '{}' is not ISO-8601", o.window));
    m.study_window = {*start, *end};
  }
  if (!o.output.empty()) m.output_dir = std::filesystem::absolute(o.output).string();
  if (o.seed) m.seed = *o.seed;
  if (o.threads) m.threads = *o.threads;
  if (!o.dtw_window.empty()) m.dtw_window = rhythm::parse_warp_window(o.dtw_window);
  if (!o.k.empty()) m.k = o.k;
  if (!o.k_range.empty()) {
    const auto comma = o.k_range.find(',');
    if (comma == std::string::npos) throw ConfigError("--k-range expects first,last");
    try {
      m.k_scan_first = std::stoi(o.k_range.substr(0, comma));
      m.k_scan_last = std::stoi(o.k_range.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("--k-range '{}' is not first,last", o.k_range));
    }
  }
  if (!o.mode.empty()) {
    if (o.mode == "independent") {
      m.scope = rhythm::ClusterScope::independent;
    } else if (o.mode == "transversal") {
      m.scope = rhythm::ClusterScope::transversal;
    } else {
      throw ConfigError(fmt::format("--mode '{}' must be independent or transversal", o.mode));
    }
  }
  if (!o.centroid_mode.empty()) m.centroid_mode = rhythm::parse_centroid_mode(o.centroid_mode);
  if (!o.init.empty()) m.init = rhythm::parse_init_mode(o.init);
  if (o.min_events) m.min_events = *o.min_events;
  if (o.restarts) m.restarts = *o.restarts;
  if (o.max_iters) m.max_iters = *o.max_iters;
  return m;
}

void print_recommendations(const std::vector<rhythm::ScopeScan>& scans) {
  for (const auto& scan : scans) {
    std::string list;
    for (int k : scan.result.recommended) list += (list.empty() ? "" : ", ") + std::to_string(k);
    fmt::print("{}: recommended: {}\n", scan.scope, list.empty() ? "none" : list);
    for (const auto& row : scan.result.rows) {
      fmt::print("  k={:<3} S={:<14.6g} f={:.6f}{}\n", row.k, row.distortion, row.f,
                 row.recommended ? "  *" : "");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typical weekly signatures and DTW k-means clustering of city zones"};
  app.require_subcommand(1);

  Overrides o;
  auto* ingest = app.add_subcommand("ingest", "Parse, filter and zone-join geo-tagged events");
  auto* signatures = app.add_subcommand("signatures", "Build weekly signature variants");
  auto* cluster = app.add_subcommand("cluster", "DTW k-means per city or pooled");
  auto* kscan = app.add_subcommand("kscan", "Scan K and report f(K) recommendations");
  auto* report = app.add_subcommand("report", "Rebuild choropleths and write report.json");
  auto* run = app.add_subcommand("run", "All stages in order");
  for (auto* cmd : {ingest, signatures, cluster, kscan, report, run}) add_common(cmd, o);

  auto* synth = app.add_subcommand("synth", "Write a planted-rhythm synthetic fixture");
  std::string synth_dir = "synthetic";
  int synth_zones = 60;
  int synth_cities = 1;
  int synth_weeks = 4;
  std::uint64_t synth_seed = 7;
  std::vector<int> synth_k{3};
  synth->add_option("dir", synth_dir, "Output directory")->default_val("synthetic");
  synth->add_option("--zones", synth_zones, "Zones per city")->default_val(60);
  synth->add_option("--cities", synth_cities, "Number of cities (>1 writes a transversal manifest)")
      ->default_val(1);
  synth->add_option("--weeks", synth_weeks, "Weeks of events")->default_val(4);
  synth->add_option("--seed", synth_seed, "Generator and manifest seed")->default_val(7);
  synth->add_option("-k,--k", synth_k, "k value(s) for the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(rhythm::ExitCode::config);
  }

  try {
    if (synth->parsed()) {
      std::vector<rhythm::SyntheticCity> cities;
      for (int i = 0; i < synth_cities; ++i) {
        rhythm::SyntheticCity c;
        c.city = synth_cities == 1 ? "synth" : fmt::format("synth{}", i + 1);
        c.zones = synth_zones;
        c.weeks = synth_weeks;
        c.seed = synth_seed + static_cast<std::uint64_t>(i);
        c.utc_offset = i == 0 ? 0 : 3;
        c.origin_lon = 10.0 + i;
        c.outside_zone_events = 25;
        c.malformed_lines = 4;
        c.out_of_range_lines = 3;
        c.outside_window_events = 5;
        cities.push_back(c);
      }
      rhythm::write_synthetic_fixture(synth_dir, cities, synth_seed, synth_k,
                                      synth_cities > 1 ? "transversal" : "independent");
      fmt::print("wrote fixture to {}\n", (std::filesystem::path(synth_dir) / "manifest.json").string());
      return 0;
    }

    const RunManifest m = effective_manifest(o);
    if (ingest->parsed()) {
      const auto reports = rhythm::cmd_ingest(m);
      std::cout << rhythm::ingest_summary_json(reports, rhythm::provenance_of(m)) << "\n";
    } else if (signatures->parsed()) {
      for (const auto& r : rhythm::cmd_signatures(m)) {
        fmt::print("{}: {} zones, {} excluded from clustering\n", r.city, r.zones, r.excluded);
      }
    } else if (cluster->parsed()) {
      for (const auto& path : rhythm::cmd_cluster(m)) fmt::print("wrote {}\n", path.string());
    } else if (kscan->parsed()) {
      print_recommendations(rhythm::cmd_kscan(m));
    } else if (report->parsed()) {
      fmt::print("wrote {}\n", rhythm::cmd_report(m).string());
    } else if (run->parsed()) {
      const auto reports = rhythm::cmd_ingest(m);
      std::cout << rhythm::ingest_summary_json(reports, rhythm::provenance_of(m)) << "\n";
      (void)rhythm::cmd_signatures(m);
      print_recommendations(rhythm::cmd_kscan(m));
      (void)rhythm::cmd_cluster(m);
      fmt::print("wrote {}\n", rhythm::cmd_report(m).string());
    }
  } catch (const rhythm::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return static_cast<int>(rhythm::ExitCode::internal);
  }
  return 0;
}
