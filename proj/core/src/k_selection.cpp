#include "rhythm/k_selection.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "rhythm/error.hpp"

namespace rhythm {

double distortion(const ClusterModel& model, std::span<const Item> items) {
  return recompute_distortion(items, model.labels, model.centroids, model.window);
}

double f_alpha(int k, int dimension) {
  if (k < 2) throw ConfigError(fmt::format("alpha is defined for k >= 2 (got {})", k));
  if (dimension < 2) throw ConfigError(fmt::format("dimension must be >= 2 (got {})", dimension));
  double alpha = 1.0 - 3.0 / (4.0 * static_cast<double>(dimension));
  for (int j = 3; j <= k; ++j) alpha += (1.0 - alpha) / 6.0;
  return alpha;
}

std::map<int, double> f_statistic(const std::map<int, double>& distortions, int dimension) {
  if (dimension < 2) throw ConfigError(fmt::format("dimension must be >= 2 (got {})", dimension));
  int expected = 1;
  for (const auto& [k, _] : distortions) {
    if (k != expected) {
      throw ConfigError(fmt::format("distortions must cover k = 1..K contiguously (missing {})",
                                    expected));
    }
    ++expected;
  }
  std::map<int, double> f;
  double alpha = 0.0;
  for (const auto& [k, s] : distortions) {
    if (k == 1) {
      f[k] = 1.0;
      continue;
    }
    alpha = k == 2 ? f_alpha(2, dimension) : alpha + (1.0 - alpha) / 6.0;
    const double prev = distortions.at(k - 1);
    f[k] = prev > 0.0 ? s / (alpha * prev) : 1.0;
  }
  return f;
}

std::vector<int> recommend(const std::map<int, double>& f, double threshold) {
  std::vector<std::pair<double, int>> picks;
  for (auto it = f.begin(); it != f.end(); ++it) {
    if (it == f.begin()) continue;
    const auto next = std::next(it);
    if (next == f.end()) break;
    const double left = std::prev(it)->second;
    const double value = it->second;
    if (value < left && value < next->second && value < threshold) picks.emplace_back(value, it->first);
  }
  std::sort(picks.begin(), picks.end());
  std::vector<int> out;
  for (const auto& [_, k] : picks) out.push_back(k);
  return out;
}

KScanResult k_scan(std::span<const Item> items, const ClusterConfig& base, int k_max, int restarts,
                   double threshold) {
  validate_items(items);
  if (k_max < 1) throw ConfigError("k scan range must include at least k = 1");
  if (static_cast<std::size_t>(k_max) > items.size()) {
    throw DataError(fmt::format("k scan up to {} needs at least that many items (have {})", k_max,
                                items.size()));
  }
  const PairwiseDistances distances(items, base.window, base.threads);

  KScanResult result;
  result.threshold = threshold;
  result.dimension = items.empty() ? 0 : static_cast<int>(items.front().values.size());
  std::map<int, double> s;
  for (int k = 1; k <= k_max; ++k) {
    ClusterConfig cfg = base;
    cfg.k = k;
    ClusterModel model = fit(items, cfg, restarts, &distances);
    s[k] = model.distortion;
    result.models.push_back(std::move(model));
  }
  const auto f = f_statistic(s, result.dimension);
  result.recommended = recommend(f, threshold);
  for (int k = 1; k <= k_max; ++k) {
    const bool rec = std::find(result.recommended.begin(), result.recommended.end(), k) !=
                     result.recommended.end();
    result.rows.push_back({k, s.at(k), f.at(k), rec});
  }
  return result;
}

}  // namespace rhythm
