#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rhythm/clustering.hpp"
#include "rhythm/geo_zones.hpp"
#include "rhythm/synthetic.hpp"
#include "rhythm/ts_distance.hpp"

using namespace rhythm;

namespace {

std::vector<double> walk(std::mt19937_64& rng, std::size_t n = 168) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> v(n);
  double x = 0.0;
  for (auto& y : v) y = (x += step(rng));
  return v;
}

WarpWindow window_arg(std::int64_t r) {
  return r < 0 ? WarpWindow::unbounded() : WarpWindow::band(static_cast<std::size_t>(r));
}

void BM_Dtw(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto x = walk(rng);
  const auto y = walk(rng);
  const auto w = window_arg(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dtw_squared(x, y, w));
}
BENCHMARK(BM_Dtw)->Arg(0)->Arg(4)->Arg(12)->Arg(24)->Arg(-1);

void BM_LbKeogh(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto x = walk(rng);
  const auto env = envelope(walk(rng), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lb_keogh_squared(x, env));
}
BENCHMARK(BM_LbKeogh)->Arg(4)->Arg(24);

void BM_Envelope(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto y = walk(rng);
  for (auto _ : state) benchmark::DoNotOptimize(envelope(y, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Envelope)->Arg(4)->Arg(24);

struct AssignFixture {
  std::vector<Item> items;
  std::vector<std::vector<double>> centroids;
  AssignFixture() {
    const auto planted = planted_items(SyntheticCity{});
    for (int rep = 0; rep < 8; ++rep) {
      for (const auto& it : planted) items.push_back({it.id + "_" + std::to_string(rep), it.values});
    }
    for (std::size_t c = 0; c < 8; ++c) centroids.push_back(planted[c * 7].values);
  }
};

const AssignFixture& assign_fixture() {
  static const AssignFixture f;
  return f;
}

void BM_AssignPruned(benchmark::State& state) {
  const auto& f = assign_fixture();
  std::size_t pruned = 0;
  for (auto _ : state) {
    const auto r = assign(f.items, f.centroids, kDefaultWarpWindow);
    pruned = r.pruned;
    benchmark::DoNotOptimize(r.labels.data());
  }
  state.counters["pruned_frac"] =
      static_cast<double>(pruned) / static_cast<double>(f.items.size() * f.centroids.size());
}
BENCHMARK(BM_AssignPruned)->Unit(benchmark::kMillisecond);

void BM_AssignExhaustive(benchmark::State& state) {
  const auto& f = assign_fixture();
  for (auto _ : state) {
    const auto r = assign_exhaustive(f.items, f.centroids, kDefaultWarpWindow);
    benchmark::DoNotOptimize(r.labels.data());
  }
}
BENCHMARK(BM_AssignExhaustive)->Unit(benchmark::kMillisecond);

void BM_PairwiseDistances(benchmark::State& state) {
  const auto items = planted_items(SyntheticCity{});
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    PairwiseDistances d(items, kDefaultWarpWindow, threads);
    benchmark::DoNotOptimize(d(0, 1));
  }
}
BENCHMARK(BM_PairwiseDistances)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

Zone polygon_zone(std::mt19937_64& rng, int vertices) {
  std::uniform_real_distribution<double> rad(0.5, 1.0);
  Ring ring;
  for (int i = 0; i < vertices; ++i) {
    const double a = 2.0 * 3.141592653589793 * i / vertices;
    const double r = rad(rng);
    ring.push_back({r * std::cos(a), r * std::sin(a)});
  }
  ring.push_back(ring.front());
  return make_zone("p", "c", "", {ring});
}

void BM_Contains(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const Zone z = polygon_zone(rng, static_cast<int>(state.range(0)));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<LonLat> pts(1024);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pts[i++ & 1023];
    benchmark::DoNotOptimize(contains(z, p.lon, p.lat));
  }
}
BENCHMARK(BM_Contains)->Arg(16)->Arg(256)->Arg(4096);

void BM_ZoneIndexAssign(benchmark::State& state) {
  SyntheticCity c;
  c.zones = static_cast<int>(state.range(0));
  std::vector<Zone> zones;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(c.zones))));
  for (int i = 0; i < c.zones; ++i) {
    const double x = i % cols;
    const double y = i / cols;
    zones.push_back(make_zone("z" + std::to_string(i), "c", "",
                              {{{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}}}));
  }
  const ZoneIndex index(std::move(zones));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, cols);
  std::vector<LonLat> pts(1024);
  for (auto& p : pts) p = {u(rng), u(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pts[i++ & 1023];
    benchmark::DoNotOptimize(index.assign(p.lon, p.lat));
  }
}
BENCHMARK(BM_ZoneIndexAssign)->Arg(61)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
