#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "innervsense/config.hpp"
#include "innervsense/events.hpp"
#include "innervsense/pad_model.hpp"
#include "innervsense/time_series.hpp"

namespace innervsense {

enum class ScenarioKind {
  ramp_hold_unload,
  step_hold_relax,
  dynamometer_trial,
  bicep_full_cycles,
  bicep_stepwise,
  squats,
};

std::string_view scenario_name(ScenarioKind kind) noexcept;
ScenarioKind parse_scenario(std::string_view name);  // Errc::unknown_scenario
std::vector<std::string_view> scenario_names();

inline constexpr double kPadRateHz = 50.0;

struct Scenario {
  ScenarioKind kind = ScenarioKind::ramp_hold_unload;
  KeyValueConfig params;  // scenario keys; pad keys are read by PadParams::from_config
  std::uint64_t seed = 1;
};

// Everything a scenario run produces. Pressure is the unquantized 50 Hz
// measurement; truth holds the reference channels at their native rates
// ("force", "displacement", "torque", "angle", "pad_force").
struct SessionData {
  ScenarioKind kind = ScenarioKind::ramp_hold_unload;
  std::uint64_t seed = 1;
  PadParams pad;
  std::map<std::string, std::string> params;  // resolved scenario parameters
  TimeSeries pressure;
  std::map<std::string, TimeSeries> truth;
  std::vector<Event> events;
};

// Angle-to-force lookup used by the bicep scenarios: per-mass pad force at a
// set of elbow angles, linear in angle between them and clamped outside.
class SteadyStateTable {
 public:
  SteadyStateTable(std::vector<double> angles_deg, std::map<double, std::vector<double>> force_by_mass);

  static SteadyStateTable defaults();

  double force(double angle_deg, double mass_kg) const;
  const std::vector<double>& angles() const noexcept { return angles_; }
  const std::map<double, std::vector<double>>& rows() const noexcept { return rows_; }

 private:
  std::vector<double> angles_;
  std::map<double, std::vector<double>> rows_;
};

// Condition naming for the dynamometer protocol, e.g. "flexion_above_knee".
std::string condition_name(std::string_view direction, std::string_view location);

// Runs a scenario. Throws Errc::bad_params for invalid or unknown parameters.
SessionData run_scenario(const Scenario& scenario, const PadParams& params);

// Convenience: scenario + pad parameters from one config (unknown keys rejected).
SessionData run_scenario(ScenarioKind kind, const KeyValueConfig& config, std::uint64_t seed);

}  // namespace innervsense
