#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rhythm {

using Series = std::span<const double>;

/// Sakoe-Chiba band: aligned indices may differ by at most `radius`.
/// An empty radius means unbounded.
class WarpWindow {
 public:
  constexpr WarpWindow() = default;
  static constexpr WarpWindow unbounded() { return WarpWindow{}; }
  static constexpr WarpWindow band(std::size_t radius) { return WarpWindow{radius}; }

  [[nodiscard]] constexpr bool is_unbounded() const noexcept { return !radius_.has_value(); }
  [[nodiscard]] constexpr std::optional<std::size_t> radius() const noexcept { return radius_; }
  /// Radius clamped to m - 1 for series of length m.
  [[nodiscard]] constexpr std::size_t effective(std::size_t m) const noexcept {
    const std::size_t cap = m == 0 ? 0 : m - 1;
    return radius_ ? std::min(*radius_, cap) : cap;
  }
  /// "unbounded" or the integer radius.
  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(const WarpWindow&, const WarpWindow&) = default;

 private:
  constexpr explicit WarpWindow(std::size_t r) : radius_(r) {}
  std::optional<std::size_t> radius_;
};

/// Default band used by the pipeline: +/- 4 hours.
inline constexpr WarpWindow kDefaultWarpWindow = WarpWindow::band(4);

/// Parse "unbounded" / "none" / a non-negative integer. ConfigError otherwise.
[[nodiscard]] WarpWindow parse_warp_window(const std::string& text);

[[nodiscard]] double euclidean(Series x, Series y);

/// Squared DTW cost: minimum cumulative squared difference over monotone,
/// contiguous paths inside the band. When the running cost of every cell in
/// a row exceeds `cutoff`, returns +inf without finishing the table; any
/// result <= cutoff is exact.
[[nodiscard]] double dtw_squared(Series x, Series y, WarpWindow window,
                                 double cutoff = std::numeric_limits<double>::infinity());

/// sqrt(dtw_squared).
[[nodiscard]] double dtw(Series x, Series y, WarpWindow window);

/// Optimal warping path as (i, j) index pairs from (0, 0) to (m-1, m-1),
/// together with its squared cost. Uses a full band-limited table.
struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> steps;
  double cost_squared = 0.0;
};
[[nodiscard]] WarpPath dtw_path(Series x, Series y, WarpWindow window);

struct Envelope {
  std::vector<double> upper;
  std::vector<double> lower;
  std::size_t radius = 0;
};

/// Running max / min of y over [t - r, t + r], clamped to the series.
[[nodiscard]] Envelope envelope(Series y, std::size_t radius);
[[nodiscard]] Envelope envelope(Series y, WarpWindow window);

/// Sum of squared excursions of x outside the envelope.
[[nodiscard]] double lb_keogh_squared(Series x, const Envelope& env);
[[nodiscard]] double lb_keogh(Series x, const Envelope& env);

}  // namespace rhythm
