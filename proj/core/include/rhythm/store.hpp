#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rhythm/ingest.hpp"
#include "rhythm/signatures.hpp"

namespace rhythm {

/// Stamped into every artifact the pipeline writes.
struct Provenance {
  std::string manifest_hash;
  std::uint64_t seed = 0;
};

/// Zoned-events CSV: `event_id,zone_id,slot,local_ts`, preceded by one
/// `# manifest_hash=... seed=...` comment line.
void write_zoned_events(const std::filesystem::path& path, const std::vector<ZonedEvent>& events,
                        const Provenance& provenance);
[[nodiscard]] std::vector<ZonedEvent> read_zoned_events(const std::filesystem::path& path);

enum class RegionKind { zone, city };

struct RegionMeta {
  RegionKind kind = RegionKind::zone;
  std::int64_t weeks_observed = 0;
  std::int64_t total_events = 0;
  bool constant = false;
  bool excluded = false;
  std::string exclusion_reason;  // empty when included
  DayValues seasonal{};
};

/// Signature store for one city: every variant of every region plus a
/// sidecar of per-region metadata.
struct SignatureStore {
  std::string city;
  int utc_offset_hours = 0;
  TimeWindow local_window;
  int min_events = 0;
  std::vector<std::string> regions;  // write order; zones ascending, city last
  std::map<std::string, RegionMeta> meta;
  std::map<std::string, std::map<SignatureVariant, WeeklySignature>> signatures;

  [[nodiscard]] const WeeklySignature& get(const std::string& region,
                                           SignatureVariant variant) const;
};

/// CSV columns `region_id,variant,slot,value`; sidecar JSON holds metadata.
void write_signature_store(const std::filesystem::path& csv_path,
                           const std::filesystem::path& sidecar_path, const SignatureStore& store,
                           const Provenance& provenance);
[[nodiscard]] SignatureStore read_signature_store(const std::filesystem::path& csv_path,
                                                  const std::filesystem::path& sidecar_path);

/// Write text atomically enough for a single-writer run directory: the
/// parent directory is created as needed. IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace rhythm
