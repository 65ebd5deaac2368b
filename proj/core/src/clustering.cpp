#include "rhythm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include <fmt/format.h>

#include "rhythm/error.hpp"
#include "rhythm/parallel.hpp"

namespace rhythm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Portable draws from mt19937_64: the standard fixes the engine's output but
// not the distributions' algorithms.
double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::vector<std::size_t>> members_by_cluster(std::span<const int> labels, int k) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return members;
}

void check_k(int k, std::size_t n) {
  if (k <= 0) throw ConfigError(fmt::format("k must be positive (got {})", k));
  if (static_cast<std::size_t>(k) > n) {
    throw ConfigError(fmt::format("k = {} exceeds the number of items ({})", k, n));
  }
}

// Partial Fisher-Yates draw of k distinct indices.
std::vector<std::size_t> uniform_pick(std::size_t n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(pool[i], pool[j]);
    chosen.push_back(pool[i]);
  }
  return chosen;
}

}  // namespace

std::string_view to_string(CentroidMode mode) noexcept {
  return mode == CentroidMode::dba ? "dba" : "medoid";
}

std::string_view to_string(InitMode mode) noexcept {
  return mode == InitMode::kmeanspp ? "kmeans++" : "uniform";
}

CentroidMode parse_centroid_mode(std::string_view name) {
  if (name == "dba") return CentroidMode::dba;
  if (name == "medoid") return CentroidMode::medoid;
  throw ConfigError(fmt::format("unknown centroid mode '{}' (expected dba or medoid)", name));
}

InitMode parse_init_mode(std::string_view name) {
  if (name == "kmeans++" || name == "kmeanspp") return InitMode::kmeanspp;
  if (name == "uniform") return InitMode::uniform;
  throw ConfigError(fmt::format("unknown init mode '{}' (expected kmeans++ or uniform)", name));
}

void validate_items(std::span<const Item> items) {
  if (items.empty()) return;
  const std::size_t m = items.front().values.size();
  if (m == 0) throw DataError(fmt::format("item '{}' has an empty series", items.front().id));
  for (const auto& item : items) {
    if (item.values.size() != m) {
      throw DataError(fmt::format("item '{}' has length {}, expected {}", item.id,
                                  item.values.size(), m));
    }
  }
}

PairwiseDistances::PairwiseDistances(std::span<const Item> items, WarpWindow window,
                                     unsigned threads)
    : n_(items.size()), window_(window), d_(n_ * n_, 0.0) {
  validate_items(items);
  parallel_for(n_, threads, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n_; ++b) {
      d_[a * n_ + b] = dtw_squared(items[a].values, items[b].values, window_);
    }
  });
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = a + 1; b < n_; ++b) d_[b * n_ + a] = d_[a * n_ + b];
  }
}

std::vector<std::size_t> init_centroids(const PairwiseDistances& distances, int k,
                                        std::uint64_t seed, InitMode mode) {
  const std::size_t n = distances.size();
  check_k(k, n);
  if (mode == InitMode::uniform) return uniform_pick(n, k, seed);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(static_cast<std::size_t>(k));

  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, kInf);
  auto take = [&](std::size_t idx) {
    chosen.push_back(idx);
    taken[idx] = true;
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], distances(i, idx));
  };
  take(uniform_index(rng, n));
  while (chosen.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) total += nearest[i];
    }
    if (total > 0.0) {
      const double target = uniform_unit(rng) * total;
      double acc = 0.0;
      std::size_t pick = n;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || nearest[i] <= 0.0) continue;
        last_positive = i;
        acc += nearest[i];
        if (target < acc) {
          pick = i;
          break;
        }
      }
      take(pick < n ? pick : last_positive);
    } else {
      // Every remaining item duplicates a chosen one; pick uniformly among them.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      take(free[uniform_index(rng, free.size())]);
    }
  }
  return chosen;
}

std::vector<std::size_t> init_centroids(std::span<const Item> items, int k, std::uint64_t seed,
                                        WarpWindow window, InitMode mode) {
  check_k(k, items.size());
  if (mode == InitMode::uniform) return uniform_pick(items.size(), k, seed);
  return init_centroids(PairwiseDistances(items, window), k, seed, mode);
}

Assignment assign(std::span<const Item> items, std::span<const std::vector<double>> centroids,
                  WarpWindow window, unsigned threads) {
  if (centroids.empty()) throw InternalError("assign called with no centroids");
  std::vector<Envelope> envelopes;
  envelopes.reserve(centroids.size());
  for (const auto& c : centroids) envelopes.push_back(envelope(c, window));

  Assignment out;
  out.labels.assign(items.size(), 0);
  out.cost_squared.assign(items.size(), kInf);
  std::vector<std::size_t> evaluations(items.size(), 0);
  std::vector<std::size_t> pruned(items.size(), 0);

  parallel_for(items.size(), threads, [&](std::size_t i) {
    const auto& x = items[i].values;
    double best = kInf;
    int best_c = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (best < kInf && lb_keogh_squared(x, envelopes[c]) > best) {
        ++pruned[i];
        continue;
      }
      ++evaluations[i];
      const double d = dtw_squared(x, centroids[c], window, best);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    out.labels[i] = best_c;
    out.cost_squared[i] = best;
  });
  out.dtw_evaluations = std::accumulate(evaluations.begin(), evaluations.end(), std::size_t{0});
  out.pruned = std::accumulate(pruned.begin(), pruned.end(), std::size_t{0});
  return out;
}

Assignment assign_exhaustive(std::span<const Item> items,
                             std::span<const std::vector<double>> centroids, WarpWindow window,
                             unsigned threads) {
  if (centroids.empty()) throw InternalError("assign called with no centroids");
  Assignment out;
  out.labels.assign(items.size(), 0);
  out.cost_squared.assign(items.size(), kInf);
  parallel_for(items.size(), threads, [&](std::size_t i) {
    double best = kInf;
    int best_c = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = dtw_squared(items[i].values, centroids[c], window);
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    out.labels[i] = best_c;
    out.cost_squared[i] = best;
  });
  out.dtw_evaluations = items.size() * centroids.size();
  return out;
}

std::size_t medoid_of(std::span<const std::size_t> members, const PairwiseDistances& distances) {
  if (members.empty()) throw InternalError("medoid of an empty cluster");
  std::size_t best = 0;
  double best_cost = kInf;
  for (std::size_t a = 0; a < members.size(); ++a) {
    double cost = 0.0;
    for (std::size_t b = 0; b < members.size(); ++b) cost += distances(members[a], members[b]);
    if (cost < best_cost) {
      best_cost = cost;
      best = a;
    }
  }
  return best;
}

std::vector<double> dba_refine(std::span<const Item> items, std::span<const std::size_t> members,
                               std::vector<double> start, WarpWindow window, int iterations) {
  std::vector<double> centroid = std::move(start);
  const std::size_t m = centroid.size();
  std::vector<double> sum(m);
  std::vector<std::size_t> count(m);
  for (int it = 0; it < iterations; ++it) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t idx : members) {
      const auto& series = items[idx].values;
      const WarpPath path = dtw_path(centroid, series, window);
      for (const auto& [ci, sj] : path.steps) {
        sum[ci] += series[sj];
        ++count[ci];
      }
    }
    for (std::size_t t = 0; t < m; ++t) centroid[t] = sum[t] / static_cast<double>(count[t]);
  }
  return centroid;
}

std::vector<std::vector<double>> update_centroids(std::span<const Item> items,
                                                  std::span<const int> labels, int k,
                                                  CentroidMode mode, WarpWindow window,
                                                  const PairwiseDistances* distances,
                                                  int dba_iterations) {
  std::optional<PairwiseDistances> local;
  if (distances == nullptr) {
    local.emplace(items, window);
    distances = &*local;
  }
  const auto members = members_by_cluster(labels, k);
  std::vector<std::vector<double>> centroids(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) {
      throw InternalError(fmt::format("cluster {} is empty during centroid update", c));
    }
    const std::size_t med = members[c][medoid_of(members[c], *distances)];
    centroids[c] = items[med].values;
    if (mode == CentroidMode::dba && members[c].size() > 1) {
      centroids[c] = dba_refine(items, members[c], std::move(centroids[c]), window, dba_iterations);
    }
  }
  return centroids;
}

namespace {

// Move far-away items into empty clusters. Returns true if anything moved.
bool repair_empty_clusters(std::span<const Item> items, Assignment& asg,
                           std::vector<std::vector<double>>& centroids) {
  const int k = static_cast<int>(centroids.size());
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : asg.labels) ++sizes[static_cast<std::size_t>(label)];
  bool moved = false;
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] != 0) continue;
    std::size_t far = items.size();
    double far_cost = -1.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (sizes[static_cast<std::size_t>(asg.labels[i])] <= 1) continue;
      if (asg.cost_squared[i] > far_cost) {
        far_cost = asg.cost_squared[i];
        far = i;
      }
    }
    if (far == items.size()) throw InternalError("cannot repair empty cluster: k exceeds items");
    --sizes[static_cast<std::size_t>(asg.labels[far])];
    ++sizes[static_cast<std::size_t>(c)];
    asg.labels[far] = c;
    asg.cost_squared[far] = 0.0;
    centroids[static_cast<std::size_t>(c)] = items[far].values;
    moved = true;
  }
  return moved;
}

double total_cost(const Assignment& asg) {
  return std::accumulate(asg.cost_squared.begin(), asg.cost_squared.end(), 0.0);
}

}  // namespace

ClusterModel iterate(std::span<const Item> items, const ClusterConfig& config,
                     const PairwiseDistances* distances) {
  validate_items(items);
  check_k(config.k, items.size());
  if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");

  std::optional<PairwiseDistances> local;
  if (distances == nullptr || distances->size() != items.size() ||
      distances->window() != config.window) {
    local.emplace(items, config.window, config.threads);
    distances = &*local;
  }

  const auto k = static_cast<std::size_t>(config.k);
  std::vector<std::vector<double>> centroids;
  for (std::size_t idx : init_centroids(*distances, config.k, config.seed, config.init)) {
    centroids.push_back(items[idx].values);
  }

  ClusterModel model;
  model.k = config.k;
  model.seed = config.seed;
  model.base_seed = config.seed;
  model.mode = config.mode;
  model.init = config.init;
  model.window = config.window;
  for (const auto& item : items) model.ids.push_back(item.id);

  Assignment asg = assign(items, centroids, config.window, config.threads);
  repair_empty_clusters(items, asg, centroids);
  model.distortion_history.push_back(total_cost(asg));

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    auto members = members_by_cluster(asg.labels, config.k);
    std::vector<std::vector<double>> next(k);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t med = members[c][medoid_of(members[c], *distances)];
      if (config.mode == CentroidMode::medoid) {
        // Keep the current centroid unless the best member is strictly better;
        // this makes the objective non-increasing even with duplicate series.
        double current = 0.0;
        double candidate = 0.0;
        for (std::size_t i : members[c]) {
          current += asg.cost_squared[i];
          candidate += (*distances)(i, med);
        }
        next[c] = candidate < current ? items[med].values : centroids[c];
      } else if (members[c].size() > 1) {
        next[c] = dba_refine(items, members[c], items[med].values, config.window,
                             config.dba_iterations);
      } else {
        next[c] = items[med].values;
      }
    }
    centroids = std::move(next);

    const std::vector<int> previous = asg.labels;
    asg = assign(items, centroids, config.window, config.threads);
    repair_empty_clusters(items, asg, centroids);
    model.distortion_history.push_back(total_cost(asg));
    model.iterations_run = iter;
    if (asg.labels == previous) {
      model.converged = true;
      break;
    }
  }

  model.labels = asg.labels;
  model.centroids = std::move(centroids);
  model.distortion = total_cost(asg);
  return model;
}

std::uint64_t restart_seed(std::uint64_t base_seed, int restart) noexcept {
  if (restart == 0) return base_seed;
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(restart)));
}

ClusterModel fit(std::span<const Item> items, const ClusterConfig& config, int restarts,
                 const PairwiseDistances* distances) {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  std::optional<PairwiseDistances> local;
  if (distances == nullptr) {
    validate_items(items);
    local.emplace(items, config.window, config.threads);
    distances = &*local;
  }
  std::optional<ClusterModel> best;
  for (int r = 0; r < restarts; ++r) {
    ClusterConfig run = config;
    run.seed = restart_seed(config.seed, r);
    ClusterModel model = iterate(items, run, distances);
    model.base_seed = config.seed;
    model.restart = r;
    if (!best || model.distortion < best->distortion) best = std::move(model);
  }
  return std::move(*best);
}

double recompute_distortion(std::span<const Item> items, std::span<const int> labels,
                            std::span<const std::vector<double>> centroids, WarpWindow window) {
  if (labels.size() != items.size()) throw DataError("labels and items differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= centroids.size()) throw DataError(fmt::format("label {} out of range", labels[i]));
    total += dtw_squared(items[i].values, centroids[c], window);
  }
  return total;
}

std::map<std::string, int> ClusterModel::assignments() const {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], labels[i]);
  return out;
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) ++sizes[static_cast<std::size_t>(label)];
  return sizes;
}

std::vector<Item> transversal_pool(
    std::span<const std::pair<std::string, std::vector<Item>>> city_items) {
  std::vector<Item> pooled;
  std::set<std::string> seen;
  for (const auto& [city, items] : city_items) {
    for (const auto& item : items) {
      Item named{fmt::format("{}/{}", city, item.id), item.values};
      if (!seen.insert(named.id).second) {
        throw DataError(fmt::format("duplicate pooled id '{}'", named.id));
      }
      pooled.push_back(std::move(named));
    }
  }
  return pooled;
}

std::vector<int> canonical_labels(std::span<const std::string> ids, std::span<const int> labels) {
  std::map<int, std::string> smallest;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = smallest.emplace(labels[i], ids[i]);
    if (!inserted && ids[i] < it->second) it->second = ids[i];
  }
  std::vector<std::pair<std::string, int>> order;
  for (const auto& [label, id] : smallest) order.emplace_back(id, label);
  std::sort(order.begin(), order.end());
  std::map<int, int> relabel;
  for (std::size_t r = 0; r < order.size(); ++r) relabel[order[r].second] = static_cast<int>(r);
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = relabel[labels[i]];
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions differ in length");
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double v) { return v * (v - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [_, v] : table) index += pairs(v);
  double sum_rows = 0.0;
  for (const auto& [_, v] : rows) sum_rows += pairs(v);
  double sum_cols = 0.0;
  for (const auto& [_, v] : cols) sum_cols += pairs(v);
  const double total = pairs(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace rhythm
