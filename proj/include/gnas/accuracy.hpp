#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

#include "gnas/errors.hpp"

namespace gnas {

/// Accuracy percentage held in exact hundredths of a point. Benchmark tables
/// report two fractional digits; storing centipoints keeps comparisons and
/// re-serialization free of float round-trip drift.
class Accuracy {
 public:
  Accuracy() = default;

  static Accuracy from_centi(std::int32_t centi) {
    if (centi < 0 || centi > 10000)
      throw ValidationError("accuracy out of [0, 100]: " + format_centi(centi));
    Accuracy a;
    a.centi_ = centi;
    return a;
  }

  /// Rounds to the canonical two-decimal form. Values outside [0, 100] are
  /// rejected before rounding.
  static Accuracy from_percent(double percent) {
    if (!(percent >= 0.0 && percent <= 100.0))
      throw ValidationError("accuracy out of [0, 100]: " + std::to_string(percent));
    return from_centi(static_cast<std::int32_t>(std::llround(percent * 100.0)));
  }

  std::int32_t centi() const { return centi_; }
  double percent() const { return static_cast<double>(centi_) / 100.0; }

  /// Canonical decimal form, always two fractional digits ("83.13").
  std::string str() const { return format_centi(centi_); }

  friend auto operator<=>(Accuracy, Accuracy) = default;

 private:
  static std::string format_centi(std::int32_t centi) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%d.%02d", centi / 100, std::abs(centi % 100));
    return buf;
  }

  std::int32_t centi_ = 0;
};

}  // namespace gnas
