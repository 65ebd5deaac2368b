#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rhythm/ingest.hpp"
#include "rhythm/k_selection.hpp"
#include "rhythm/manifest.hpp"
#include "rhythm/store.hpp"

namespace rhythm {

/// Stage outputs live under the manifest's output directory:
///
///   <city>/zoned_events.csv, <city>/ingest_stats.json
///   <city>/signatures.csv,   <city>/signatures.json
///   <scope>/model_k<K>.json, <scope>/choropleth[_<city>]_k<K>.geojson
///   <scope>/kscan.csv,       <scope>/centroids_k<K>.csv
///   report.json
///
/// where <scope> is the city directory in independent mode and
/// `transversal` otherwise.
struct OutputLayout {
  std::filesystem::path root;

  [[nodiscard]] std::filesystem::path city_dir(const std::string& city) const { return root / city; }
  [[nodiscard]] std::filesystem::path zoned_events(const std::string& city) const;
  [[nodiscard]] std::filesystem::path ingest_stats(const std::string& city) const;
  [[nodiscard]] std::filesystem::path signatures_csv(const std::string& city) const;
  [[nodiscard]] std::filesystem::path signatures_sidecar(const std::string& city) const;
  [[nodiscard]] std::filesystem::path scope_dir(const std::string& scope) const { return root / scope; }
  [[nodiscard]] std::filesystem::path model(const std::string& scope, int k) const;
  [[nodiscard]] std::filesystem::path choropleth(const std::string& scope, const std::string& city,
                                                 int k) const;
  [[nodiscard]] std::filesystem::path kscan(const std::string& scope) const;
  [[nodiscard]] std::filesystem::path centroids(const std::string& scope, int k) const;
  [[nodiscard]] std::filesystem::path report() const { return root / "report.json"; }
};

[[nodiscard]] Provenance provenance_of(const RunManifest& manifest);

struct CityIngestReport {
  std::string city;
  JoinStats stats;
  std::filesystem::path output;
};

/// Parse, filter and zone-join every city's events; writes zoned events and
/// per-city stats.
std::vector<CityIngestReport> cmd_ingest(const RunManifest& manifest);

/// JSON summary of drop statistics (what the CLI prints after ingest).
[[nodiscard]] std::string ingest_summary_json(const std::vector<CityIngestReport>& reports,
                                              const Provenance& provenance);

/// Build every signature variant for a city's zones and its aggregate.
/// Zones with fewer than `min_events` events (or constant series, when
/// `exclude_constant`) are flagged excluded.
[[nodiscard]] SignatureStore build_signature_store(const std::string& city, int utc_offset,
                                                   const std::vector<Zone>& zones,
                                                   const std::vector<ZonedEvent>& events,
                                                   TimeWindow local_window, int min_events,
                                                   bool exclude_constant);

struct CitySignatureReport {
  std::string city;
  std::size_t zones = 0;
  std::size_t excluded = 0;
};
std::vector<CitySignatureReport> cmd_signatures(const RunManifest& manifest);

/// Clusterable items of a store: normalized signatures of non-excluded zones.
[[nodiscard]] std::vector<Item> clustering_items(const SignatureStore& store);

/// Fits one model per (scope, k); writes model JSON and choropleths.
/// Returns the model paths written.
std::vector<std::filesystem::path> cmd_cluster(const RunManifest& manifest);

struct ScopeScan {
  std::string scope;
  KScanResult result;
  std::filesystem::path output;
};
std::vector<ScopeScan> cmd_kscan(const RunManifest& manifest);

/// Rebuild choropleths from model files and write centroid daily
/// signatures plus `report.json`.
std::filesystem::path cmd_report(const RunManifest& manifest);

/// ingest, signatures, kscan, cluster, report.
void cmd_run(const RunManifest& manifest);

}  // namespace rhythm
