#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "rhythm/ingest.hpp"

namespace rhythm {

enum class SignatureVariant { raw, normalized, residual_seasonal, residual_vs_city };

[[nodiscard]] std::string_view to_string(SignatureVariant variant) noexcept;
/// Throws DataError on an unknown name.
[[nodiscard]] SignatureVariant parse_variant(std::string_view name);

using WeekValues = std::array<double, kHoursPerWeek>;
using DayValues = std::array<double, 24>;

/// Typical weekly signature: one value per hour-of-week slot.
struct WeeklySignature {
  std::string region_id;
  SignatureVariant variant = SignatureVariant::raw;
  WeekValues values{};
  std::int64_t weeks_observed = 0;
  std::int64_t total_events = 0;
  bool constant = false;  // set by z_normalize when the source had zero spread
};

struct DailySignature {
  std::string region_id;
  int day = 0;  // 0 = Monday
  DayValues values{};
};

/// Per-slot event counts plus per-slot calendar occurrences of a study
/// window. Counts from disjoint event sets over the same window add.
class SlotCounts {
 public:
  /// Window must be hour-aligned and at least one week long (ConfigError).
  explicit SlotCounts(TimeWindow local_window);

  /// DataError if local_ts lies outside the window.
  void add(Timestamp local_ts);
  void add_slot(int slot, std::int64_t count = 1);
  SlotCounts& operator+=(const SlotCounts& other);

  [[nodiscard]] const std::array<std::int64_t, kHoursPerWeek>& counts() const noexcept {
    return counts_;
  }
  [[nodiscard]] const std::array<std::int64_t, kHoursPerWeek>& occurrences() const noexcept {
    return occurrences_;
  }
  [[nodiscard]] std::int64_t total() const noexcept { return total_; }
  [[nodiscard]] const TimeWindow& window() const noexcept { return window_; }

  /// values[s] = counts[s] / occurrences[s].
  [[nodiscard]] WeeklySignature finalize(std::string region_id) const;

 private:
  TimeWindow window_;
  std::array<std::int64_t, kHoursPerWeek> counts_{};
  std::array<std::int64_t, kHoursPerWeek> occurrences_{};
  std::int64_t total_ = 0;
};

/// Raw TWS of the events in a local-time study window.
[[nodiscard]] WeeklySignature build_tws(std::span<const ZonedEvent> events,
                                        std::string region_id, TimeWindow local_window);

/// Series with population standard deviation below this are constant.
inline constexpr double kConstantSigma = 1e-12;

/// Normalized values are snapped to multiples of 2^-kNormalizedGridBits. With
/// |z| < 2^8 every difference and sum of two normalized values is then exact
/// in binary64, so `residual_vs_city(z, c) + c == z` holds bit for bit.
inline constexpr int kNormalizedGridBits = 40;

/// z-score with population sigma. Constant input yields the zero vector and
/// sets `constant`.
[[nodiscard]] WeeklySignature z_normalize(const WeeklySignature& sig);

struct SeasonalDecomposition {
  DayValues seasonal{};  // hour-of-day mean across the 7 days
  WeeklySignature residual;
};

[[nodiscard]] SeasonalDecomposition seasonal_residual(const WeeklySignature& sig);

/// zone - city, slot by slot. Both must be normalized (InternalError otherwise).
[[nodiscard]] WeeklySignature residual_vs_city(const WeeklySignature& zone_sig,
                                               const WeeklySignature& city_sig);

[[nodiscard]] std::array<DailySignature, 7> daily_signatures(const WeeklySignature& sig);

struct SeriesMoments {
  double mean = 0.0;
  double stddev = 0.0;  // population
};
[[nodiscard]] SeriesMoments moments(std::span<const double> values) noexcept;

}  // namespace rhythm
