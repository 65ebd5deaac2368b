#include "rhythm/ts_distance.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rhythm/error.hpp"

namespace rhythm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_length(Series x, Series y, const char* what) {
  if (x.size() != y.size()) {
    throw DataError(fmt::format("{}: series lengths differ ({} vs {})", what, x.size(), y.size()));
  }
}

double sq(double v) noexcept { return v * v; }

}  // namespace

std::string WarpWindow::to_string() const {
  return radius_ ? std::to_string(*radius_) : std::string("unbounded");
}

WarpWindow parse_warp_window(const std::string& text) {
  if (text == "unbounded" || text == "none" || text == "inf") return WarpWindow::unbounded();
  std::size_t used = 0;
  long long r = -1;
  try {
    r = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || r < 0) {
    throw ConfigError(fmt::format("dtw window '{}' must be a non-negative integer or 'unbounded'", text));
  }
  return WarpWindow::band(static_cast<std::size_t>(r));
}

double euclidean(Series x, Series y) {
  require_same_length(x, y, "euclidean");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - y[i]);
  return std::sqrt(s);
}

double dtw_squared(Series x, Series y, WarpWindow window, double cutoff) {
  require_same_length(x, y, "dtw");
  const std::size_t m = x.size();
  if (m == 0) return 0.0;
  const std::size_t r = window.effective(m);

  // Two rolling rows over columns 0..m-1; cells outside the band stay +inf.
  std::vector<double> prev(m, kInf);
  std::vector<double> curr(m, kInf);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i > r ? i - r : 0;
    const std::size_t hi = std::min(m - 1, i + r);
    if (lo > 0) curr[lo - 1] = kInf;
    double row_min = kInf;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = sq(x[i] - y[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = std::min(best, prev[j]);              // deletion
        if (j > lo) best = std::min(best, curr[j - 1]);         // insertion
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]); // match
      }
      curr[j] = cost + best;
      row_min = std::min(row_min, curr[j]);
    }
    if (hi + 1 < m) curr[hi + 1] = kInf;
    if (row_min > cutoff) return kInf;
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double dtw(Series x, Series y, WarpWindow window) {
  return std::sqrt(dtw_squared(x, y, window));
}

WarpPath dtw_path(Series x, Series y, WarpWindow window) {
  require_same_length(x, y, "dtw_path");
  WarpPath path;
  const std::size_t m = x.size();
  if (m == 0) return path;
  const std::size_t r = window.effective(m);

  std::vector<double> table(m * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return table[i * m + j]; };
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i > r ? i - r : 0;
    const std::size_t hi = std::min(m - 1, i + r);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = sq(x[i] - y[j]);
      if (i == 0 && j == 0) {
        at(i, j) = cost;
        continue;
      }
      double best = kInf;
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      at(i, j) = cost + best;
    }
  }
  path.cost_squared = at(m - 1, m - 1);

  // Backtrack; ties prefer the diagonal, then deletion, then insertion.
  std::size_t i = m - 1;
  std::size_t j = m - 1;
  path.steps.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.steps.emplace_back(i, j);
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

Envelope envelope(Series y, std::size_t radius) {
  const std::size_t m = y.size();
  Envelope env;
  env.radius = radius;
  env.upper.resize(m);
  env.lower.resize(m);
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t lo = t > radius ? t - radius : 0;
    const std::size_t hi = std::min(m - 1, t + std::min(radius, m));
    const auto [mn, mx] = std::minmax_element(y.begin() + static_cast<std::ptrdiff_t>(lo),
                                              y.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    env.lower[t] = *mn;
    env.upper[t] = *mx;
  }
  return env;
}

Envelope envelope(Series y, WarpWindow window) { return envelope(y, window.effective(y.size())); }

double lb_keogh_squared(Series x, const Envelope& env) {
  if (x.size() != env.upper.size()) {
    throw DataError(fmt::format("lb_keogh: series length {} does not match envelope length {}",
                                x.size(), env.upper.size()));
  }
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] > env.upper[t]) {
      s += sq(x[t] - env.upper[t]);
    } else if (x[t] < env.lower[t]) {
      s += sq(env.lower[t] - x[t]);
    }
  }
  return s;
}

double lb_keogh(Series x, const Envelope& env) { return std::sqrt(lb_keogh_squared(x, env)); }

}  // namespace rhythm
