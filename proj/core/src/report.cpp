#include "rhythm/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "rhythm/error.hpp"

namespace rhythm {

using ojson = nlohmann::ordered_json;

std::string model_to_json(const ClusterModel& model, const ModelContext& context) {
  ojson doc;
  doc["k"] = model.k;
  doc["seed"] = model.base_seed;
  doc["mode"] = std::string(to_string(model.mode));
  if (model.window.is_unbounded()) {
    doc["window"] = nullptr;
  } else {
    doc["window"] = *model.window.radius();
  }
  doc["distortion"] = model.distortion;
  doc["iterations_run"] = model.iterations_run;
  ojson assignments = ojson::object();
  for (std::size_t i = 0; i < model.ids.size(); ++i) assignments[model.ids[i]] = model.labels[i];
  doc["assignments"] = std::move(assignments);
  doc["centroids"] = model.centroids;
  doc["manifest_hash"] = context.provenance.manifest_hash;
  doc["scope"] = context.scope;
  doc["cities"] = context.cities;
  doc["init"] = std::string(to_string(model.init));
  doc["restart"] = model.restart;
  doc["run_seed"] = model.seed;
  doc["converged"] = model.converged;
  doc["distortion_history"] = model.distortion_history;
  doc["cluster_sizes"] = model.cluster_sizes();
  return doc.dump(2) + "\n";
}

LoadedModel model_from_json(const std::string& text) {
  LoadedModel out;
  try {
    const ojson doc = ojson::parse(text);
    ClusterModel& m = out.model;
    m.k = doc.at("k").get<int>();
    m.base_seed = doc.at("seed").get<std::uint64_t>();
    m.seed = doc.value("run_seed", m.base_seed);
    m.mode = parse_centroid_mode(doc.at("mode").get<std::string>());
    const auto& w = doc.at("window");
    m.window = w.is_null() ? WarpWindow::unbounded() : WarpWindow::band(w.get<std::size_t>());
    m.distortion = doc.at("distortion").get<double>();
    m.iterations_run = doc.at("iterations_run").get<int>();
    for (const auto& [id, label] : doc.at("assignments").items()) {
      m.ids.push_back(id);
      m.labels.push_back(label.get<int>());
    }
    m.centroids = doc.at("centroids").get<std::vector<std::vector<double>>>();
    m.init = parse_init_mode(doc.value("init", std::string("kmeans++")));
    m.restart = doc.value("restart", 0);
    m.converged = doc.value("converged", false);
    if (doc.contains("distortion_history")) {
      m.distortion_history = doc.at("distortion_history").get<std::vector<double>>();
    }
    out.context.provenance.manifest_hash = doc.value("manifest_hash", std::string());
    out.context.provenance.seed = m.base_seed;
    out.context.scope = doc.value("scope", std::string("independent"));
    if (doc.contains("cities")) out.context.cities = doc.at("cities").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model file: {}", e.what()));
  }
  const ClusterModel& m = out.model;
  if (static_cast<std::size_t>(m.k) != m.centroids.size()) {
    throw DataError(fmt::format("model has k = {} but {} centroids", m.k, m.centroids.size()));
  }
  for (int label : m.labels) {
    if (label < 0 || label >= m.k) throw DataError(fmt::format("model label {} out of range", label));
  }
  return out;
}

std::string choropleth_geojson(const std::string& zones_geojson, const std::string& id_key,
                               const std::map<std::string, int>& assignments,
                               const Provenance& provenance, int k) {
  ojson doc;
  try {
    doc = ojson::parse(zones_geojson);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("malformed GeoJSON: {}", e.what()));
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError("GeoJSON root has no features array");
  }
  for (auto& feature : doc["features"]) {
    auto& props = feature["properties"];
    if (!props.is_object()) props = ojson::object();
    std::string id;
    if (props.contains(id_key)) {
      const auto& v = props[id_key];
      id = v.is_string() ? v.get<std::string>() : v.dump();
    }
    const auto it = assignments.find(id);
    if (it == assignments.end()) {
      props["cluster"] = nullptr;
    } else {
      props["cluster"] = it->second;
    }
  }
  doc["manifest_hash"] = provenance.manifest_hash;
  doc["seed"] = provenance.seed;
  doc["k"] = k;
  return doc.dump(2) + "\n";
}

std::string kscan_csv(const KScanResult& scan, const Provenance& provenance) {
  std::string out = fmt::format("# manifest_hash={} seed={} dimension={} threshold={}\n",
                                provenance.manifest_hash, provenance.seed, scan.dimension,
                                detail::format_double(scan.threshold));
  out += "k,S,f,recommended\n";
  for (const auto& row : scan.rows) {
    out += fmt::format("{},{},{},{}\n", row.k, detail::format_double(row.distortion),
                       detail::format_double(row.f), row.recommended ? "true" : "false");
  }
  return out;
}

}  // namespace rhythm
