#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rhythm/ts_distance.hpp"

namespace rhythm {

/// One clusterable region: an id and its (z-normalized) signature.
struct Item {
  std::string id;
  std::vector<double> values;
};

enum class CentroidMode { dba, medoid };
enum class InitMode { kmeanspp, uniform };

[[nodiscard]] std::string_view to_string(CentroidMode mode) noexcept;
[[nodiscard]] std::string_view to_string(InitMode mode) noexcept;
/// ConfigError on unknown names.
[[nodiscard]] CentroidMode parse_centroid_mode(std::string_view name);
[[nodiscard]] InitMode parse_init_mode(std::string_view name);

/// Symmetric matrix of squared DTW distances between items, computed once
/// per (items, window) and shared by seeding, medoid updates and restarts.
class PairwiseDistances {
 public:
  PairwiseDistances(std::span<const Item> items, WarpWindow window, unsigned threads = 1);

  [[nodiscard]] double operator()(std::size_t a, std::size_t b) const noexcept {
    return d_[a * n_ + b];
  }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] WarpWindow window() const noexcept { return window_; }

 private:
  std::size_t n_ = 0;
  WarpWindow window_;
  std::vector<double> d_;
};

/// Choose k distinct item indices as initial centroids. k-means++ draws
/// each next seed with probability proportional to its squared DTW
/// distance to the nearest chosen seed; uniform picks k items at random.
/// Deterministic for a given (item order, k, seed). ConfigError if k <= 0
/// or k > n.
[[nodiscard]] std::vector<std::size_t> init_centroids(std::span<const Item> items, int k,
                                                      std::uint64_t seed, WarpWindow window,
                                                      InitMode mode = InitMode::kmeanspp);
[[nodiscard]] std::vector<std::size_t> init_centroids(const PairwiseDistances& distances, int k,
                                                      std::uint64_t seed,
                                                      InitMode mode = InitMode::kmeanspp);

struct Assignment {
  std::vector<int> labels;
  std::vector<double> cost_squared;  // squared DTW to the assigned centroid
  std::size_t dtw_evaluations = 0;
  std::size_t pruned = 0;  // centroid comparisons skipped by LB_Keogh
};

/// Nearest centroid under DTW, ties toward the lower centroid index. The
/// LB_Keogh bound against each centroid envelope skips full DTW whenever it
/// already exceeds the best distance found; results equal exhaustive search.
[[nodiscard]] Assignment assign(std::span<const Item> items,
                                std::span<const std::vector<double>> centroids,
                                WarpWindow window, unsigned threads = 1);

/// Same contract without lower-bound pruning or early abandoning.
[[nodiscard]] Assignment assign_exhaustive(std::span<const Item> items,
                                           std::span<const std::vector<double>> centroids,
                                           WarpWindow window, unsigned threads = 1);

/// Member index (into `members`) minimizing summed squared DTW to the others;
/// ties go to the earliest member.
[[nodiscard]] std::size_t medoid_of(std::span<const std::size_t> members,
                                    const PairwiseDistances& distances);

/// DTW barycenter averaging from `start`, `iterations` refinement passes.
[[nodiscard]] std::vector<double> dba_refine(std::span<const Item> items,
                                             std::span<const std::size_t> members,
                                             std::vector<double> start, WarpWindow window,
                                             int iterations);

inline constexpr int kDbaIterations = 10;

/// Recompute centroids for labels in [0, k). InternalError on an empty cluster.
[[nodiscard]] std::vector<std::vector<double>> update_centroids(
    std::span<const Item> items, std::span<const int> labels, int k, CentroidMode mode,
    WarpWindow window, const PairwiseDistances* distances = nullptr,
    int dba_iterations = kDbaIterations);

struct ClusterConfig {
  int k = 2;
  std::uint64_t seed = 0;
  WarpWindow window = kDefaultWarpWindow;
  CentroidMode mode = CentroidMode::dba;
  InitMode init = InitMode::kmeanspp;
  int max_iters = 100;
  int dba_iterations = kDbaIterations;
  unsigned threads = 1;
};

struct ClusterModel {
  int k = 0;
  std::vector<std::string> ids;  // item order used for clustering
  std::vector<int> labels;       // parallel to ids
  std::vector<std::vector<double>> centroids;
  double distortion = 0.0;
  /// Distortion after the initial assignment and after every iteration.
  std::vector<double> distortion_history;
  std::uint64_t seed = 0;          // seed actually used for this run
  std::uint64_t base_seed = 0;     // seed the restarts were derived from
  int restart = 0;
  int iterations_run = 0;
  bool converged = false;
  CentroidMode mode = CentroidMode::dba;
  InitMode init = InitMode::kmeanspp;
  WarpWindow window = kDefaultWarpWindow;

  [[nodiscard]] std::map<std::string, int> assignments() const;
  [[nodiscard]] std::vector<std::size_t> cluster_sizes() const;
};

/// Alternate assign / update until the labels stop changing or max_iters
/// iterations have run. Empty clusters are repaired by moving the item
/// farthest from its centroid (among clusters with more than one member)
/// into the empty cluster.
[[nodiscard]] ClusterModel iterate(std::span<const Item> items, const ClusterConfig& config,
                                   const PairwiseDistances* distances = nullptr);

/// Seed for restart r. Restart 0 uses the base seed unchanged.
[[nodiscard]] std::uint64_t restart_seed(std::uint64_t base_seed, int restart) noexcept;

/// Best-distortion model over `restarts` seeded runs; ties keep the earliest.
[[nodiscard]] ClusterModel fit(std::span<const Item> items, const ClusterConfig& config,
                               int restarts, const PairwiseDistances* distances = nullptr);

/// Recompute the sum of squared DTW distances to assigned centroids.
[[nodiscard]] double recompute_distortion(std::span<const Item> items,
                                          std::span<const int> labels,
                                          std::span<const std::vector<double>> centroids,
                                          WarpWindow window);

/// Pool the items of several cities, namespacing ids as `city/zone_id`.
/// DataError on a duplicate namespaced id.
[[nodiscard]] std::vector<Item> transversal_pool(
    std::span<const std::pair<std::string, std::vector<Item>>> city_items);

/// Relabel clusters in order of their smallest member id.
[[nodiscard]] std::vector<int> canonical_labels(std::span<const std::string> ids,
                                                std::span<const int> labels);

[[nodiscard]] double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Throws DataError unless all items are non-empty and of equal length.
void validate_items(std::span<const Item> items);

}  // namespace rhythm
