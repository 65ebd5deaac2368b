#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rhythm/clustering.hpp"
#include "rhythm/k_selection.hpp"
#include "rhythm/store.hpp"

namespace rhythm {

/// Extra context stamped into a model file.
struct ModelContext {
  Provenance provenance;
  std::string scope;                // "independent" or "transversal"
  std::vector<std::string> cities;  // cities whose zones were clustered
};

/// Model JSON: k, seed, mode, window, distortion, iterations_run,
/// assignments {region_id: cluster}, centroids [[...]] plus provenance and
/// run details. Key order is fixed, so equal models serialize identically.
[[nodiscard]] std::string model_to_json(const ClusterModel& model, const ModelContext& context);

struct LoadedModel {
  ClusterModel model;
  ModelContext context;
};
/// Inverse of model_to_json. ParseError / DataError on malformed input.
[[nodiscard]] LoadedModel model_from_json(const std::string& text);

/// Copy of a zones FeatureCollection with a `cluster` property on every
/// feature (null for zones that were not clustered). `assignments` is keyed
/// by the feature's id property value.
[[nodiscard]] std::string choropleth_geojson(const std::string& zones_geojson,
                                             const std::string& id_key,
                                             const std::map<std::string, int>& assignments,
                                             const Provenance& provenance, int k);

/// `k,S,f,recommended` rows after a provenance comment line.
[[nodiscard]] std::string kscan_csv(const KScanResult& scan, const Provenance& provenance);

}  // namespace rhythm
