#include "rhythm/signatures.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rhythm/error.hpp"

namespace rhythm {

std::string_view to_string(SignatureVariant variant) noexcept {
  switch (variant) {
    case SignatureVariant::raw: return "raw";
    case SignatureVariant::normalized: return "normalized";
    case SignatureVariant::residual_seasonal: return "residual_seasonal";
    case SignatureVariant::residual_vs_city: return "residual_vs_city";
  }
  return "raw";
}

SignatureVariant parse_variant(std::string_view name) {
  if (name == "raw") return SignatureVariant::raw;
  if (name == "normalized") return SignatureVariant::normalized;
  if (name == "residual_seasonal") return SignatureVariant::residual_seasonal;
  if (name == "residual_vs_city") return SignatureVariant::residual_vs_city;
  throw DataError(fmt::format("unknown signature variant '{}'", name));
}

SeriesMoments moments(std::span<const double> values) noexcept {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

SlotCounts::SlotCounts(TimeWindow local_window) : window_(local_window) {
  if (window_.start % kSecondsPerHour != 0 || window_.end % kSecondsPerHour != 0) {
    throw ConfigError("study window bounds must fall on whole hours");
  }
  if (window_.end - window_.start < kSecondsPerWeek) {
    throw ConfigError(fmt::format("study window spans {} hours; at least {} required",
                                  (window_.end - window_.start) / kSecondsPerHour, kHoursPerWeek));
  }
  for (Timestamp h = window_.start; h < window_.end; h += kSecondsPerHour) {
    ++occurrences_[static_cast<std::size_t>(hour_of_week(h))];
  }
}

void SlotCounts::add(Timestamp local_ts) {
  if (!window_.contains(local_ts)) {
    throw DataError(fmt::format("event at {} lies outside the study window",
                                format_timestamp(local_ts)));
  }
  add_slot(hour_of_week(local_ts));
}

void SlotCounts::add_slot(int slot, std::int64_t count) {
  if (slot < 0 || slot >= kHoursPerWeek) {
    throw DataError(fmt::format("hour-of-week slot {} out of range", slot));
  }
  counts_[static_cast<std::size_t>(slot)] += count;
  total_ += count;
}

SlotCounts& SlotCounts::operator+=(const SlotCounts& other) {
  if (other.window_.start != window_.start || other.window_.end != window_.end) {
    throw InternalError("cannot merge slot counts over different windows");
  }
  for (std::size_t s = 0; s < counts_.size(); ++s) counts_[s] += other.counts_[s];
  total_ += other.total_;
  return *this;
}

WeeklySignature SlotCounts::finalize(std::string region_id) const {
  WeeklySignature sig;
  sig.region_id = std::move(region_id);
  sig.variant = SignatureVariant::raw;
  std::int64_t min_occ = occurrences_[0];
  for (std::size_t s = 0; s < counts_.size(); ++s) {
    sig.values[s] = static_cast<double>(counts_[s]) / static_cast<double>(occurrences_[s]);
    min_occ = std::min(min_occ, occurrences_[s]);
  }
  sig.weeks_observed = min_occ;
  sig.total_events = total_;
  return sig;
}

WeeklySignature build_tws(std::span<const ZonedEvent> events, std::string region_id,
                          TimeWindow local_window) {
  SlotCounts counts(local_window);
  for (const auto& ev : events) counts.add(ev.local_ts);
  return counts.finalize(std::move(region_id));
}

WeeklySignature z_normalize(const WeeklySignature& sig) {
  WeeklySignature out = sig;
  out.variant = SignatureVariant::normalized;
  const auto [mean, sigma] = moments(sig.values);
  if (sigma < kConstantSigma) {
    out.values.fill(0.0);
    out.constant = true;
    return out;
  }
  out.constant = false;
  for (std::size_t t = 0; t < out.values.size(); ++t) {
    const double z = (sig.values[t] - mean) / sigma;
    out.values[t] = std::ldexp(std::nearbyint(std::ldexp(z, kNormalizedGridBits)), -kNormalizedGridBits);
  }
  return out;
}

SeasonalDecomposition seasonal_residual(const WeeklySignature& sig) {
  SeasonalDecomposition dec;
  for (int h = 0; h < 24; ++h) {
    double sum = 0.0;
    for (int d = 0; d < 7; ++d) sum += sig.values[static_cast<std::size_t>(d * 24 + h)];
    dec.seasonal[static_cast<std::size_t>(h)] = sum / 7.0;
  }
  dec.residual = sig;
  dec.residual.variant = SignatureVariant::residual_seasonal;
  for (std::size_t t = 0; t < sig.values.size(); ++t) {
    dec.residual.values[t] = sig.values[t] - dec.seasonal[t % 24];
  }
  return dec;
}

WeeklySignature residual_vs_city(const WeeklySignature& zone_sig,
                                 const WeeklySignature& city_sig) {
  if (zone_sig.variant != SignatureVariant::normalized ||
      city_sig.variant != SignatureVariant::normalized) {
    throw InternalError("residual_vs_city requires normalized signatures");
  }
  WeeklySignature out = zone_sig;
  out.variant = SignatureVariant::residual_vs_city;
  for (std::size_t t = 0; t < out.values.size(); ++t) {
    out.values[t] = zone_sig.values[t] - city_sig.values[t];
  }
  return out;
}

std::array<DailySignature, 7> daily_signatures(const WeeklySignature& sig) {
  std::array<DailySignature, 7> days;
  for (int d = 0; d < 7; ++d) {
    auto& day = days[static_cast<std::size_t>(d)];
    day.region_id = sig.region_id;
    day.day = d;
    for (int h = 0; h < 24; ++h) {
      day.values[static_cast<std::size_t>(h)] = sig.values[static_cast<std::size_t>(d * 24 + h)];
    }
  }
  return days;
}

}  // namespace rhythm
