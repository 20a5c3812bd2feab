#include "innervsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include "innervsense/dsp.hpp"
#include "innervsense/error.hpp"
#include "../core/json_text.hpp"

namespace innervsense {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string format_number(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

const TimeSeries& truth_channel(const Session& s, const std::string& name) {
  const auto it = s.truth.find(name);
  if (it == s.truth.end()) {
    throw Error(Errc::bad_params, "session has no '" + name + "' reference channel (simulated sessions only)");
  }
  return it->second;
}

// Samples with start <= t < end.
TimeSeries half_open(const TimeSeries& x, double start, double end) {
  const auto t = x.t_us();
  const auto lo = std::lower_bound(t.begin(), t.end(), seconds_to_us(start)) - t.begin();
  const auto hi = std::lower_bound(t.begin(), t.end(), seconds_to_us(end)) - t.begin();
  std::vector<std::int64_t> tt(t.begin() + lo, t.begin() + hi);
  std::vector<double> vv(x.values().begin() + lo, x.values().begin() + hi);
  return TimeSeries::from_us(std::move(tt), std::move(vv), x.unit(), x.rate_hint());
}

struct Block {
  double start = 0.0;
  double end = 0.0;
  double rest_start = 0.0;
  std::optional<double> mass_kg;
  TimeSeries pressure;  // offset and filtered
};

// Splits a record into its "block" intervals (the whole record when there
// are none), each offset by the mean of its first rest and lowpass filtered.
std::vector<Block> preprocess_blocks(const Session& session, const AnalysisOptions& opts) {
  const TimeSeries p = session_pressure(session);
  if (p.empty()) throw Error(Errc::empty_series, "session has no pressure samples");
  std::vector<Block> blocks;
  for (const auto& iv : intervals(session.events, "block")) {
    Block b;
    b.start = iv.start_s;
    b.end = iv.end_s;
    if (iv.begin.values.count("mass_kg")) b.mass_kg = iv.begin.values.at("mass_kg");
    blocks.push_back(std::move(b));
  }
  if (blocks.empty()) blocks.push_back(Block{p.start_s(), p.end_s() + 1e-6, p.start_s(), std::nullopt, {}});

  const auto rests = intervals(session.events, "rest");
  const FilterSpec spec{opts.cutoff_hz, kPadRateHz};
  for (auto& b : blocks) {
    b.rest_start = b.start;
    for (const auto& r : rests) {
      if (r.start_s >= b.start && r.start_s < b.end) {
        b.rest_start = r.start_s;
        break;
      }
    }
    TimeSeries slice = half_open(p, b.start, b.end + 1e-6);
    slice = offset_by_rest(slice, b.rest_start + opts.rest_window.first, b.rest_start + opts.rest_window.second);
    b.pressure = lowpass_zero_phase(slice, spec);
  }
  return blocks;
}

const Block& block_for(const std::vector<Block>& blocks, double t) {
  for (const auto& b : blocks) {
    if (t >= b.start && t < b.end) return b;
  }
  throw Error(Errc::window_out_of_range, "annotation at " + format_number(t) + " s lies outside every block");
}

std::string group_key(const std::optional<double>& mass) {
  return mass ? "mass_" + format_number(*mass) : std::string("all");
}

}  // namespace

json to_json(const LinFit& f) {
  return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2},
              {"n", f.n},         {"residual_sd", f.residual_sd}, {"degenerate_y", f.degenerate_y}};
}

json to_json(const ExpFit& f) {
  return json{{"y_inf", f.y_inf}, {"amplitude", f.amplitude}, {"tau", f.tau}, {"rmse", f.rmse},
              {"iterations", f.iterations}};
}

json to_json(const SteadyState& s) {
  return json{{"value", s.value}, {"window_start", s.window_start}, {"window_len", s.window_len}, {"cov", s.cov}};
}

namespace {
json effect_json(const EffectRow& e) {
  return json{{"SS", e.ss}, {"df", e.df}, {"MS", e.ms}, {"F", number_or_null(e.f)}, {"p", e.p}};
}
}  // namespace

json to_json(const AnovaResult& r) {
  return json{{"A", effect_json(r.a)},
              {"B", effect_json(r.b)},
              {"AxB", effect_json(r.ab)},
              {"SS_error", r.ss_error},
              {"df_error", r.df_error},
              {"MS_error", r.ms_error},
              {"SS_total", r.ss_total},
              {"grand_mean", r.grand_mean},
              {"degenerate", r.degenerate}};
}

json to_json(const PosthocResult& r) {
  json comps = json::array();
  for (const auto& c : r.comparisons) {
    comps.push_back(json{{"level_i", c.level_i},
                         {"level_j", c.level_j},
                         {"mean_diff", c.mean_diff},
                         {"p", c.p},
                         {"significant", c.significant}});
  }
  json letters = json::object();
  for (std::size_t i = 0; i < r.levels.size(); ++i) letters[format_number(r.levels[i])] = r.letters[i];
  return json{{"factor", r.factor},     {"method", posthoc_method_name(r.method)},
              {"alpha", r.alpha},       {"skipped", r.skipped},
              {"levels", r.levels},     {"means", r.means},
              {"comparisons", comps},   {"letters", letters}};
}

json to_json(const StreamHealth& h) {
  return json{{"frames_ok", h.frames_ok},         {"frames_crc_fail", h.frames_crc_fail},
              {"frames_resync", h.frames_resync}, {"gaps", h.gaps},
              {"missing_frames", h.missing_frames}, {"last_gap", h.last_gap},
              {"bytes_discarded", h.bytes_discarded}, {"truncated_bytes", h.truncated_bytes},
              {"last_seq", h.last_seq}};
}

TimeSeries session_pressure(const Session& session, StreamHealth* health) {
  DecodedStream d = session_stream(session);
  if (health) *health = d.health;
  return d.pressure;
}

LinFit calibrate(const Session& session) {
  const TimeSeries p = session_pressure(session);
  const TimeSeries& force = truth_channel(session, "force");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto t = p.t_us()[i];
    if (t < force.t_us().front() || t > force.t_us().back()) continue;
    x.push_back(force.at_us(t));
    y.push_back(p.value(i));
  }
  return linfit(x, y);
}

ExpFit relax(const Session& session) {
  const auto holds = intervals(session.events, "hold");
  if (holds.empty()) throw Error(Errc::bad_params, "session has no hold annotation");
  const TimeSeries p = session_pressure(session);
  const auto& h = holds.front();
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ts = p.t_s(i);
    if (ts > h.start_s && ts <= h.end_s) {
      t.push_back(ts);
      y.push_back(p.value(i));
    }
  }
  ExpFit fit = expfit(t, y);
  // Report the amplitude at the start of the hold.
  fit.amplitude = fit.amplitude * std::exp(-h.start_s / fit.tau);
  return fit;
}

std::map<std::string, LinFit> condition_fits(const Session& session, const AnalysisOptions& opts) {
  const TimeSeries p = session_pressure(session);
  const TimeSeries& torque = truth_channel(session, "torque");
  std::map<std::string, std::vector<std::pair<double, double>>> windows;
  for (const auto& iv : intervals(session.events, "trial")) {
    windows[iv.begin.tag_or("condition", "unlabelled")].emplace_back(iv.start_s, iv.end_s);
  }
  if (windows.empty()) throw Error(Errc::bad_params, "session has no trial annotations");
  std::map<std::string, LinFit> out;
  for (const auto& [cond, w] : windows) {
    out.emplace(cond, condition_correlation(torque, p, w, opts.rest_window, opts.cutoff_hz));
  }
  return out;
}

std::vector<CycleGroup> cycle_groups(const Session& session, const AnalysisOptions& opts) {
  const auto blocks = preprocess_blocks(session, opts);
  const auto cycles = intervals(session.events, "cycle");
  if (cycles.empty()) throw Error(Errc::bad_params, "session has no cycle annotations");

  std::vector<CycleGroup> groups;
  for (const auto& b : blocks) {
    std::vector<std::pair<double, double>> bounds;
    for (const auto& c : cycles) {
      if (c.start_s >= b.start && c.start_s < b.end) bounds.emplace_back(c.start_s, c.end_s);
    }
    if (bounds.empty()) continue;
    CycleGroup g;
    g.mass_kg = b.mass_kg;
    g.key = group_key(b.mass_kg);
    g.cycles = normalize_cycles(segment_cycles(b.pressure, bounds), opts.cycle_points);
    g.ensemble = ensemble_stats(g.cycles);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string cycles_csv(const CycleGroup& group) {
  std::ostringstream out;
  out.precision(17);
  out << "pct,mean,sd";
  for (std::size_t k = 0; k < group.cycles.normalized.size(); ++k) out << ",cycle_" << (k + 1);
  out << '\n';
  for (std::size_t j = 0; j < group.cycles.grid.size(); ++j) {
    out << group.cycles.grid[j] << ',' << group.ensemble.mean[j] << ',' << group.ensemble.sd[j];
    for (const auto& row : group.cycles.normalized) out << ',' << row[j];
    out << '\n';
  }
  return out.str();
}

std::vector<SteadyEntry> steady_entries(const Session& session, const AnalysisOptions& opts) {
  const auto blocks = preprocess_blocks(session, opts);
  const auto holds = intervals(session.events, "hold");
  if (holds.empty()) throw Error(Errc::bad_params, "session has no hold annotations");
  std::vector<SteadyEntry> out;
  for (const auto& h : holds) {
    const Block& b = block_for(blocks, h.start_s);
    SteadyEntry e;
    e.angle_deg = h.begin.value_or("angle_deg", std::numeric_limits<double>::quiet_NaN());
    e.mass_kg = h.begin.value_or("mass_kg", b.mass_kg.value_or(std::numeric_limits<double>::quiet_NaN()));
    e.rep = static_cast<int>(h.begin.value_or("cycle", 0.0)) + 1;
    if (!std::isfinite(e.angle_deg) || !std::isfinite(e.mass_kg)) {
      throw Error(Errc::bad_params, "hold annotations must carry angle_deg and mass_kg");
    }
    e.state = steady_state_cov(half_open(b.pressure, h.start_s, h.end_s), opts.steady_window_s);
    out.push_back(e);
  }
  return out;
}

FactorialTable steady_table(std::span<const SteadyEntry> entries) {
  std::vector<FactorialTable::Row> rows;
  for (const auto& e : entries) rows.push_back({e.angle_deg, e.mass_kg, e.rep, e.state.value});
  return FactorialTable::from_rows(std::move(rows));
}

AnovaReport anova_report(const FactorialTable& table, const AnalysisOptions& opts) {
  AnovaReport r;
  r.anova = anova2(table);
  r.posthoc_a = posthoc(table, r.anova, Factor::a, opts.posthoc, opts.alpha);
  r.posthoc_b = posthoc(table, r.anova, Factor::b, opts.posthoc, opts.alpha);
  return r;
}

json to_json(const FactorialTable& table, const AnovaReport& report) {
  json cells = json::array();
  for (std::size_t i = 0; i < table.a_levels().size(); ++i) {
    for (std::size_t j = 0; j < table.b_levels().size(); ++j) {
      cells.push_back(json{{table.a_name(), table.a_levels()[i]},
                           {table.b_name(), table.b_levels()[j]},
                           {"mean", table.cell_mean(i, j)}});
    }
  }
  return json{{"factors", json{{"A", table.a_name()}, {"B", table.b_name()}}},
              {"n_rep", table.n_rep()},
              {"anova", to_json(report.anova)},
              {"posthoc", json::array({to_json(report.posthoc_a), to_json(report.posthoc_b)})},
              {"cell_means", cells}};
}

std::string anova_text(const FactorialTable& table, const AnovaReport& report) {
  std::ostringstream out;
  char line[160];
  out << "Two-way ANOVA (" << table.a_name() << " x " << table.b_name() << ", n = " << table.n_rep()
      << " per cell)\n";
  std::snprintf(line, sizeof line, "%-12s %14s %5s %14s %10s %10s\n", "source", "SS", "df", "MS", "F", "p");
  out << line;
  auto row = [&](const char* name, const EffectRow& e) {
    std::snprintf(line, sizeof line, "%-12s %14.4f %5.0f %14.4f %10.3f %10.4g\n", name, e.ss, e.df, e.ms, e.f, e.p);
    out << line;
  };
  row(table.a_name().c_str(), report.anova.a);
  row(table.b_name().c_str(), report.anova.b);
  row("interaction", report.anova.ab);
  std::snprintf(line, sizeof line, "%-12s %14.4f %5.0f %14.4f\n", "error", report.anova.ss_error,
                report.anova.df_error, report.anova.ms_error);
  out << line;
  for (const auto* ph : {&report.posthoc_a, &report.posthoc_b}) {
    out << "\nPost-hoc " << ph->factor << " (" << posthoc_method_name(ph->method) << ", alpha " << ph->alpha << ")";
    if (ph->skipped) out << ": main effect not significant, skipped";
    out << '\n';
    for (std::size_t i = 0; i < ph->levels.size(); ++i) {
      std::snprintf(line, sizeof line, "  %-8g mean %10.3f  %s\n", ph->levels[i], ph->means[i], ph->letters[i].c_str());
      out << line;
    }
  }
  return out.str();
}

json analyze_calibrate(const Session& session) { return to_json(calibrate(session)); }

json analyze_relax(const Session& session) { return to_json(relax(session)); }

json analyze_condition(const Session& session, const AnalysisOptions& opts) {
  json out = json::object();
  for (const auto& [cond, fit] : condition_fits(session, opts)) out[cond] = to_json(fit);
  return json{{"conditions", out}};
}

json analyze_cycles(const Session& session, const AnalysisOptions& opts, const std::string& session_dir) {
  json groups = json::array();
  for (const auto& g : cycle_groups(session, opts)) {
    const auto peak = std::max_element(g.ensemble.mean.begin(), g.ensemble.mean.end());
    const auto idx = static_cast<std::size_t>(peak - g.ensemble.mean.begin());
    json j{{"group", g.key},
           {"n_cycles", g.cycles.normalized.size()},
           {"n_points", g.cycles.grid.size()},
           {"peak_mean_pa", *peak},
           {"peak_pct", g.cycles.grid[idx]},
           {"max_sd_pa", *std::max_element(g.ensemble.sd.begin(), g.ensemble.sd.end())}};
    if (g.mass_kg) j["mass_kg"] = *g.mass_kg;
    if (!session_dir.empty()) {
      const std::string name = "cycles_" + g.key + ".csv";
      add_derived(session_dir, name, cycles_csv(g));
      j["csv"] = "derived/" + name;
    }
    groups.push_back(std::move(j));
  }
  return json{{"groups", groups}};
}

json analyze_steady(const Session& session, const AnalysisOptions& opts, const std::string& session_dir) {
  const auto entries = steady_entries(session, opts);
  json holds = json::array();
  for (const auto& e : entries) {
    json j = to_json(e.state);
    j["angle_deg"] = e.angle_deg;
    j["mass_kg"] = e.mass_kg;
    j["rep"] = e.rep;
    holds.push_back(std::move(j));
  }
  json out{{"holds", holds}};
  if (!session_dir.empty()) {
    const FactorialTable table = steady_table(entries);
    std::ostringstream csv;
    write_table_csv(csv, table);
    add_derived(session_dir, "steady_table.csv", csv.str());
    out["table"] = "derived/steady_table.csv";
  }
  return out;
}

json build_report(const std::string& session_dir, const AnalysisOptions& opts) {
  const Session session = read_session(session_dir);
  StreamHealth health;
  const TimeSeries p = session_pressure(session, &health);

  json report{{"session", session.manifest.id},
              {"source", session.manifest.source},
              {"samples", p.size()},
              {"duration_s", p.empty() ? 0.0 : p.duration_s()},
              {"health", to_json(health)}};
  if (!session.manifest.scenario.empty()) report["scenario"] = session.manifest.scenario;

  std::set<std::string> labels;
  for (const auto& e : session.events) labels.insert(e.label);
  const bool has_force = session.truth.count("force") != 0;
  const bool has_torque = session.truth.count("torque") != 0;
  json analyses = json::object();
  json skipped = json::object();
  auto attempt = [&](const std::string& name, auto&& fn) {
    try {
      analyses[name] = fn();
    } catch (const Error& e) {
      skipped[name] = std::string(errc_name(e.code())) + ": " + e.what();
    }
  };
  if (has_force) attempt("calibrate", [&] { return analyze_calibrate(session); });
  if (has_force && labels.count("hold")) attempt("relax", [&] { return analyze_relax(session); });
  if (has_torque && labels.count("trial")) attempt("condition", [&] { return analyze_condition(session, opts); });
  if (labels.count("cycle") && !labels.count("hold")) {
    attempt("cycles", [&] { return analyze_cycles(session, opts, session_dir); });
  }
  if (labels.count("hold") && !has_force && !has_torque) {
    attempt("steady", [&] { return analyze_steady(session, opts, session_dir); });
    attempt("anova", [&] {
      const FactorialTable table = steady_table(steady_entries(session, opts));
      return to_json(table, anova_report(table, opts));
    });
  }
  report["analyses"] = analyses;
  if (!skipped.empty()) report["skipped"] = skipped;

  std::ostringstream md;
  md << "# Session " << session.manifest.id << "\n\n";
  md << "- source: " << session.manifest.source << "\n";
  if (!session.manifest.scenario.empty()) md << "- scenario: " << session.manifest.scenario << "\n";
  md << "- samples: " << p.size() << " (" << format_number(p.empty() ? 0.0 : p.duration_s()) << " s)\n";
  md << "- frames ok: " << health.frames_ok << ", CRC failures: " << health.frames_crc_fail
     << ", resyncs: " << health.frames_resync << ", gaps: " << health.gaps << "\n";
  if (analyses.contains("calibrate")) {
    const auto& c = analyses["calibrate"];
    md << "\n## Calibration\n\nP = " << format_number(c["slope"].get<double>()) << " F + "
       << format_number(c["intercept"].get<double>()) << " (R^2 = " << format_number(c["r2"].get<double>()) << ", n = "
       << c["n"].get<std::size_t>() << ")\n";
  }
  if (analyses.contains("relax")) {
    const auto& r = analyses["relax"];
    md << "\n## Stress relaxation\n\ntau = " << format_number(r["tau"].get<double>()) << " s, y_inf = "
       << format_number(r["y_inf"].get<double>()) << " Pa, amplitude = " << format_number(r["amplitude"].get<double>())
       << " Pa\n";
  }
  if (analyses.contains("condition")) {
    md << "\n## Torque vs. pressure\n\n| condition | slope (Pa/Nm) | intercept (Pa) | R^2 |\n|---|---|---|---|\n";
    for (const auto& [cond, fit] : analyses["condition"]["conditions"].items()) {
      md << "| " << cond << " | " << format_number(fit["slope"].get<double>()) << " | "
         << format_number(fit["intercept"].get<double>()) << " | " << format_number(fit["r2"].get<double>()) << " |\n";
    }
  }
  if (analyses.contains("cycles")) {
    md << "\n## Cycles\n\n| group | cycles | peak mean (Pa) | peak at (%) | max sd (Pa) |\n|---|---|---|---|---|\n";
    for (const auto& g : analyses["cycles"]["groups"]) {
      md << "| " << g["group"].get<std::string>() << " | " << g["n_cycles"].get<std::size_t>() << " | "
         << format_number(g["peak_mean_pa"].get<double>()) << " | " << format_number(g["peak_pct"].get<double>())
         << " | " << format_number(g["max_sd_pa"].get<double>()) << " |\n";
    }
  }
  if (analyses.contains("anova")) {
    const FactorialTable table = steady_table(steady_entries(session, opts));
    md << "\n## Steady-state ANOVA\n\n```\n" << anova_text(table, anova_report(table, opts)) << "```\n";
  }
  if (!skipped.empty()) {
    md << "\n## Skipped\n\n";
    for (const auto& [name, why] : skipped.items()) md << "- " << name << ": " << why.get<std::string>() << "\n";
  }

  add_derived(session_dir, "report.json", json_text(report, 2) + "\n");
  add_derived(session_dir, "report.md", md.str());
  return report;
}

}  // namespace innervsense
