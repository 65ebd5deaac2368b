#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rhythm/clustering.hpp"
#include "rhythm/ingest.hpp"

namespace rhythm {

struct CityConfig {
  std::string name;
  std::string events;  // as written; resolve with RunManifest::resolve
  std::string zones;
  GeoBox bbox;
  int utc_offset = 0;
  std::string id_key = "zone_id";
};

enum class ClusterScope { independent, transversal };

[[nodiscard]] std::string_view to_string(ClusterScope scope) noexcept;

/// Everything a pipeline run needs. Relative paths resolve against
/// `base_dir` (the manifest's directory).
struct RunManifest {
  std::vector<CityConfig> cities;
  TimeWindow study_window;  // UTC, half-open
  WarpWindow dtw_window = kDefaultWarpWindow;
  std::vector<int> k{5};
  int k_scan_first = 1;
  int k_scan_last = 10;
  std::uint64_t seed = 0;
  CentroidMode centroid_mode = CentroidMode::dba;
  InitMode init = InitMode::kmeanspp;
  int min_events = 50;
  bool exclude_constant = true;
  int max_iters = 100;
  int restarts = 5;
  double f_threshold = 0.85;
  ClusterScope scope = ClusterScope::independent;
  std::string output_dir = "out";
  unsigned threads = 1;
  std::filesystem::path base_dir = ".";

  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;
  [[nodiscard]] std::filesystem::path output_path() const { return resolve(output_dir); }
  [[nodiscard]] const CityConfig& city(std::string_view name) const;
};

/// Parse a JSON manifest. Unknown keys are rejected except those starting
/// with `_`, which are free-form notes. ConfigError on any problem.
[[nodiscard]] RunManifest parse_manifest(std::string_view text,
                                         const std::filesystem::path& base_dir);
[[nodiscard]] RunManifest load_manifest(const std::filesystem::path& path);

/// Structural checks (city names, window, k values, ranges). When
/// `check_inputs` is set, also require every referenced input file to exist.
void validate_manifest(const RunManifest& manifest, bool check_inputs);

/// Canonical JSON of every setting that affects results. The output
/// directory and worker count are left out: they never change outputs.
[[nodiscard]] std::string canonical_json(const RunManifest& manifest);
/// 16 lowercase hex digits of FNV-1a over canonical_json.
[[nodiscard]] std::string manifest_hash(const RunManifest& manifest);

}  // namespace rhythm
