#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "innervsense/anova.hpp"
#include "innervsense/cycles.hpp"
#include "innervsense/fit.hpp"
#include "innervsense/frame.hpp"
#include "innervsense/session.hpp"

namespace innervsense {

struct AnalysisOptions {
  double cutoff_hz = 6.0;
  std::pair<double, double> rest_window{0.5, 2.0};  // s after the start of a rest or trial
  double steady_window_s = 2.0;
  std::size_t cycle_points = kCyclePoints;
  PosthocMethod posthoc = PosthocMethod::fisher_lsd;
  double alpha = 0.05;
};

nlohmann::json to_json(const LinFit& fit);
nlohmann::json to_json(const ExpFit& fit);
nlohmann::json to_json(const SteadyState& s);
nlohmann::json to_json(const AnovaResult& r);
nlohmann::json to_json(const PosthocResult& r);
nlohmann::json to_json(const StreamHealth& h);

// Decoded pressure of a session (Pa, 50 Hz).
TimeSeries session_pressure(const Session& session, StreamHealth* health = nullptr);

// Pressure vs. reference force over the whole record.
LinFit calibrate(const Session& session);

// Exponential fit of the pressure samples strictly inside the first hold.
ExpFit relax(const Session& session);

// Pooled torque-pressure fit per dynamometer condition, keyed by condition.
std::map<std::string, LinFit> condition_fits(const Session& session, const AnalysisOptions& opts = {});

struct CycleGroup {
  std::string key;                  // "mass_0.5" or "all"
  std::optional<double> mass_kg;
  CycleSet cycles;                  // normalized
  Ensemble ensemble;
};

// Pressure is offset by its block's rest window and lowpass filtered, then
// cut at the annotated cycles and normalized, grouped by mass.
std::vector<CycleGroup> cycle_groups(const Session& session, const AnalysisOptions& opts = {});
std::string cycles_csv(const CycleGroup& group);

struct SteadyEntry {
  double angle_deg = 0.0;
  double mass_kg = 0.0;
  int rep = 0;
  SteadyState state;
};

// Minimum-CoV steady state of every annotated hold (offset and filtered
// pressure), one entry per hold.
std::vector<SteadyEntry> steady_entries(const Session& session, const AnalysisOptions& opts = {});
FactorialTable steady_table(std::span<const SteadyEntry> entries);

struct AnovaReport {
  AnovaResult anova;
  PosthocResult posthoc_a;
  PosthocResult posthoc_b;
};
AnovaReport anova_report(const FactorialTable& table, const AnalysisOptions& opts = {});
nlohmann::json to_json(const FactorialTable& table, const AnovaReport& report);
std::string anova_text(const FactorialTable& table, const AnovaReport& report);

// Session-level summaries printed by the CLI. `session_dir`, when non-empty,
// receives derived artifacts.
nlohmann::json analyze_calibrate(const Session& session);
nlohmann::json analyze_relax(const Session& session);
nlohmann::json analyze_condition(const Session& session, const AnalysisOptions& opts);
nlohmann::json analyze_cycles(const Session& session, const AnalysisOptions& opts, const std::string& session_dir);
nlohmann::json analyze_steady(const Session& session, const AnalysisOptions& opts, const std::string& session_dir);

// Runs every analysis the session supports; writes derived/report.md and
// derived/report.json. Returns the JSON.
nlohmann::json build_report(const std::string& session_dir, const AnalysisOptions& opts = {});

}  // namespace innervsense
