#pragma once

#include <map>
#include <span>
#include <vector>

#include "rhythm/clustering.hpp"

namespace rhythm {

/// Sum of squared DTW distances from each item to its assigned centroid,
/// under the model's own warp window.
[[nodiscard]] double distortion(const ClusterModel& model, std::span<const Item> items);

/// Weight for the f(K) ratio: a_2 = 1 - 3/(4 Nd), a_k = a_{k-1} + (1 - a_{k-1})/6.
/// ConfigError if k < 2 or dimension < 2.
[[nodiscard]] double f_alpha(int k, int dimension);

/// f(1) = 1; f(k) = S_k / (a_k S_{k-1}), or 1 when S_{k-1} = 0.
/// ConfigError unless the keys are exactly 1..K_max.
[[nodiscard]] std::map<int, double> f_statistic(const std::map<int, double>& distortions,
                                                int dimension);

inline constexpr double kDefaultFThreshold = 0.85;

/// Interior strict local minima of f below `threshold`, sorted by f then k.
/// The largest scanned k has no right neighbour and is never recommended.
[[nodiscard]] std::vector<int> recommend(const std::map<int, double>& f, double threshold);

struct KScanRow {
  int k = 0;
  double distortion = 0.0;
  double f = 0.0;
  bool recommended = false;
};

struct KScanResult {
  std::vector<KScanRow> rows;
  std::vector<int> recommended;
  int dimension = 0;
  double threshold = kDefaultFThreshold;
  std::vector<ClusterModel> models;  // best model per k, parallel to rows
};

/// Fit every k in [1, k_max] (best of `restarts` runs each) and evaluate f(K).
[[nodiscard]] KScanResult k_scan(std::span<const Item> items, const ClusterConfig& base, int k_max,
                                 int restarts, double threshold = kDefaultFThreshold);

}  // namespace rhythm
