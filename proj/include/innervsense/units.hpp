#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace innervsense {

enum class Unit { pascal, newton, newton_metre, millimetre, degree, dimensionless };

// Token used in CSV headers and JSON ("Pa", "N", "Nm", "mm", "deg", "dimensionless").
std::string_view unit_name(Unit u) noexcept;
Unit parse_unit(std::string_view token);

// Transducer reading as it leaves the ADC: signed 16-bit counts at a fixed
// 0.1 Pa per count.
struct AdcCode {
  std::int16_t counts = 0;

  static constexpr double kPascalPerCount = 0.1;
  static constexpr double kMinPascal = -3276.8;
  static constexpr double kMaxPascal = 3276.7;

  friend bool operator==(AdcCode, AdcCode) = default;
};

double counts_to_pascals(AdcCode code) noexcept;

// Nearest code for a pressure; throws Errc::range_error outside
// [kMinPascal, kMaxPascal] and Errc::non_finite_input for NaN/inf.
AdcCode pascals_to_counts(double pascal);

// One bulk pressure reading per sample (single interconnected cavity).
struct PressureSample {
  std::int64_t timestamp_us = 0;
  std::vector<double> channels;  // Pa
  std::uint16_t seq = 0;

  friend bool operator==(const PressureSample&, const PressureSample&) = default;
};

}  // namespace innervsense
