#include "innervsense/units.hpp"

#include <cmath>
#include <string>

#include "innervsense/error.hpp"

namespace innervsense {

std::string_view unit_name(Unit u) noexcept {
  switch (u) {
    case Unit::pascal: return "Pa";
    case Unit::newton: return "N";
    case Unit::newton_metre: return "Nm";
    case Unit::millimetre: return "mm";
    case Unit::degree: return "deg";
    case Unit::dimensionless: return "dimensionless";
  }
  return "dimensionless";
}

Unit parse_unit(std::string_view token) {
  for (Unit u : {Unit::pascal, Unit::newton, Unit::newton_metre, Unit::millimetre, Unit::degree,
                 Unit::dimensionless}) {
    if (unit_name(u) == token) return u;
  }
  throw Error(Errc::bad_params, "unknown unit '" + std::string(token) + "'");
}

double counts_to_pascals(AdcCode code) noexcept {
  return static_cast<double>(code.counts) * AdcCode::kPascalPerCount;
}

AdcCode pascals_to_counts(double pascal) {
  if (!std::isfinite(pascal)) throw Error(Errc::non_finite_input, "pressure is not finite");
  // Slack absorbs the binary representation error of the decimal bounds.
  constexpr double slack = 1e-9;
  if (pascal > AdcCode::kMaxPascal + slack || pascal < AdcCode::kMinPascal - slack) {
    throw Error(Errc::range_error, "pressure " + std::to_string(pascal) + " Pa outside ADC range");
  }
  const auto counts = std::lround(pascal / AdcCode::kPascalPerCount);
  return AdcCode{static_cast<std::int16_t>(counts)};
}

}  // namespace innervsense
