#include "innervsense/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "innervsense/error.hpp"

namespace innervsense {

namespace {

constexpr std::array kScenarios = {
    std::pair{ScenarioKind::ramp_hold_unload, std::string_view("ramp_hold_unload")},
    std::pair{ScenarioKind::step_hold_relax, std::string_view("step_hold_relax")},
    std::pair{ScenarioKind::dynamometer_trial, std::string_view("dynamometer_trial")},
    std::pair{ScenarioKind::bicep_full_cycles, std::string_view("bicep_full_cycles")},
    std::pair{ScenarioKind::bicep_stepwise, std::string_view("bicep_stepwise")},
    std::pair{ScenarioKind::squats, std::string_view("squats")},
};

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

// Scenario parameter access that remembers the resolved values for the
// session manifest.
class Params {
 public:
  explicit Params(const KeyValueConfig& cfg) : cfg_(cfg) {}

  double num(const std::string& key, double fallback) {
    const double v = cfg_.get_double(key, fallback);
    if (!std::isfinite(v)) throw Error(Errc::bad_params, key + " must be finite");
    resolved_[key] = format_number(v);
    return v;
  }
  double positive(const std::string& key, double fallback) {
    const double v = num(key, fallback);
    if (!(v > 0.0)) throw Error(Errc::bad_params, key + " must be > 0");
    return v;
  }
  double non_negative(const std::string& key, double fallback) {
    const double v = num(key, fallback);
    if (v < 0.0) throw Error(Errc::bad_params, key + " must be >= 0");
    return v;
  }
  int count(const std::string& key, long long fallback) {
    const long long v = cfg_.get_int(key, fallback);
    if (v < 1 || v > 100000) throw Error(Errc::bad_params, key + " must be >= 1");
    resolved_[key] = std::to_string(v);
    return static_cast<int>(v);
  }
  std::string text(const std::string& key, const std::string& fallback) {
    auto v = cfg_.get_string(key, fallback);
    resolved_[key] = v;
    return v;
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) {
    auto v = cfg_.get_doubles(key, fallback);
    if (v.empty()) throw Error(Errc::bad_params, key + " must not be empty");
    resolved_[key] = format_list(v);
    return v;
  }

  std::map<std::string, std::string> take() { return std::move(resolved_); }

 private:
  const KeyValueConfig& cfg_;
  std::map<std::string, std::string> resolved_;
};

// Accumulates the streams of one run on an integer-microsecond clock.
struct Builder {
  std::vector<std::int64_t> p_t;
  std::vector<double> p_v;
  struct Channel {
    Unit unit;
    double rate;
    std::vector<std::int64_t> t;
    std::vector<double> v;
  };
  std::map<std::string, Channel> truth;
  std::vector<Event> events;

  void pressure(std::int64_t t, double v) {
    p_t.push_back(t);
    p_v.push_back(v);
  }
  void channel(const std::string& name, Unit unit, double rate, std::int64_t t, double v) {
    auto [it, inserted] = truth.try_emplace(name, Channel{unit, rate, {}, {}});
    it->second.t.push_back(t);
    it->second.v.push_back(v);
  }
  void begin(std::int64_t t, const std::string& label, std::map<std::string, double> values = {},
             std::map<std::string, std::string> tags = {}) {
    events.push_back(begin_event(t, label, std::move(values), std::move(tags)));
  }
  void end(std::int64_t t, const std::string& label, std::map<std::string, double> values = {},
           std::map<std::string, std::string> tags = {}) {
    events.push_back(end_event(t, label, std::move(values), std::move(tags)));
  }
};

std::int64_t period_us(double rate_hz) {
  const double p = 1e6 / rate_hz;
  const auto rounded = std::llround(p);
  if (std::abs(p - static_cast<double>(rounded)) > 1e-9 || rounded <= 0) {
    throw Error(Errc::bad_params, "rate " + format_number(rate_hz) + " Hz has no integer microsecond period");
  }
  return rounded;
}

int decimation_to_pad_rate(double truth_rate_hz) {
  const double ratio = truth_rate_hz / kPadRateHz;
  const auto n = std::llround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9) {
    throw Error(Errc::bad_params, "truth_rate_hz must be an integer multiple of 50 Hz");
  }
  return static_cast<int>(n);
}

long long ticks_for(double seconds, double rate_hz) { return std::llround(seconds * rate_hz); }

// Raised-cosine blend from 0 to 1 over u in [0, 1].
double smooth(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * u);
}

// Sum of a few slow random sinusoids with the requested standard deviation.
class SlowWander {
 public:
  SlowWander(double sd, double f_lo, double f_hi, Rng& rng) {
    std::uniform_real_distribution<double> freq(f_lo, f_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double amp = sd * std::sqrt(2.0 / kTerms);
    for (auto& term : terms_) term = {amp, 2.0 * std::numbers::pi * freq(rng), phase(rng)};
  }
  double operator()(double t) const {
    double s = 0.0;
    for (const auto& [amp, omega, phi] : terms_) s += amp * std::sin(omega * t + phi);
    return s;
  }

 private:
  static constexpr int kTerms = 6;
  struct Term {
    double amp, omega, phi;
  };
  std::array<Term, kTerms> terms_{};
};

// --- compression tests ------------------------------------------------------

void run_compression(Builder& out, Params& prm, const PadParams& pad, Rng& rng, double target_default,
                     double hold_default) {
  const double rest_s = prm.non_negative("rest_s", 2.0);
  const double rate_mm_s = prm.positive("rate_mm_s", 1.0);
  const double target_n = prm.positive("target_force_n", target_default);
  const double hold_s = prm.non_negative("hold_s", hold_default);
  const double truth_rate = prm.positive("truth_rate_hz", 100.0);
  const double max_mm = prm.positive("max_compression_mm", 20.0);

  const auto tick_us = period_us(truth_rate);
  const int decim = decimation_to_pad_rate(truth_rate);
  const double dt = 1.0 / truth_rate;

  PadState state;
  long long k = 0;
  auto record = [&](const PadStep& s) {
    const auto t = k * tick_us;
    out.channel("force", Unit::newton, truth_rate, t, s.force_n);
    out.channel("displacement", Unit::millimetre, truth_rate, t, s.state.d_mm);
    if (k % decim == 0) out.pressure(t, s.pressure_pa);
  };
  auto advance = [&](double d_next) {
    const PadStep s = step_pad(state, PadInput{d_next, 0.0}, dt, pad, rng);
    state = s.state;
    ++k;
    record(s);
    return s;
  };

  // t = 0: unloaded pad.
  record(PadStep{state, 0.0, measure_pressure(0.0, 0.0, pad, rng)});

  out.begin(0, "rest");
  for (long long i = 0; i < ticks_for(rest_s, truth_rate); ++i) advance(0.0);
  out.end(k * tick_us, "rest");

  out.begin(k * tick_us, "load", {{"target_force_n", target_n}});
  for (;;) {
    const PadStep s = advance(state.d_mm + rate_mm_s * dt);
    if (s.force_n >= target_n) break;
    if (state.d_mm > max_mm) {
      throw Error(Errc::bad_params, "target force not reached within max_compression_mm");
    }
  }
  out.end(k * tick_us, "load");

  out.begin(k * tick_us, "hold", {{"d_mm", state.d_mm}});
  for (long long i = 0; i < ticks_for(hold_s, truth_rate); ++i) advance(state.d_mm);
  out.end(k * tick_us, "hold");

  out.begin(k * tick_us, "unload");
  while (state.d_mm > 0.0) advance(std::max(0.0, state.d_mm - rate_mm_s * dt));
  out.end(k * tick_us, "unload");

  out.begin(k * tick_us, "rest");
  for (long long i = 0; i < ticks_for(rest_s, truth_rate); ++i) advance(0.0);
  out.end(k * tick_us, "rest");
}

// --- dynamometer ------------------------------------------------------------

struct ConditionDefaults {
  const char* name;
  double gain;         // N of pad force per N*m of torque
  double disturbance;  // N, torque-independent pad loading
};

// Flexion with the pad above the knee loads the pad directly; extension above
// the knee pushes into the seat instead. Gains set the steady pressure change
// at 10 N*m (about 200 Pa and 60 Pa for the two well-placed conditions).
constexpr std::array kConditionDefaults = {
    ConditionDefaults{"extension_above_knee", 0.03, 0.6},
    ConditionDefaults{"flexion_above_knee", 0.6515, 0.15},
    ConditionDefaults{"extension_below_knee", 0.1954, 0.35},
    ConditionDefaults{"flexion_below_knee", 0.12, 0.45},
};

std::vector<std::string> expand(const std::string& value, std::initializer_list<const char*> all,
                                const char* key) {
  if (value == "all") return {all.begin(), all.end()};
  for (const char* option : all) {
    if (value == option) return {value};
  }
  throw Error(Errc::bad_params, std::string(key) + " must be one of the listed options or 'all', got '" + value + "'");
}

void run_dynamometer(Builder& out, Params& prm, const PadParams& pad, Rng& rng) {
  const auto locations = expand(prm.text("location", "above_knee"), {"above_knee", "below_knee"}, "location");
  const auto directions = expand(prm.text("direction", "flexion"), {"extension", "flexion"}, "direction");
  const int trials = prm.count("trials", 4);
  const double rest_s = prm.positive("rest_s", 5.0);
  const double hold_s = prm.positive("hold_s", 5.0);
  const double post_rest_s = prm.positive("post_rest_s", 5.0);
  const double target_nm = prm.num("target_torque_nm", 10.0);
  const double ramp_s = prm.positive("ramp_s", 0.6);
  const double wobble_nm = prm.non_negative("torque_wobble_nm", 0.3);
  const double truth_rate = prm.positive("truth_rate_hz", 1000.0);
  if (ramp_s > hold_s) throw Error(Errc::bad_params, "ramp_s must not exceed hold_s");

  const auto tick_us = period_us(truth_rate);
  const int decim = decimation_to_pad_rate(truth_rate);
  const double trial_s = rest_s + hold_s + post_rest_s;
  const long long trial_ticks = ticks_for(trial_s, truth_rate);

  long long k0 = 0;
  for (const auto& location : locations) {
    for (const auto& direction : directions) {
      const std::string cond = condition_name(direction, location);
      const auto* def = std::find_if(kConditionDefaults.begin(), kConditionDefaults.end(),
                                     [&](const ConditionDefaults& c) { return cond == c.name; });
      const double gain = prm.non_negative("gain_" + cond, def->gain);
      const double disturbance = prm.non_negative("disturbance_" + cond, def->disturbance);
      const std::map<std::string, std::string> tag{{"condition", cond}};

      out.begin(k0 * tick_us, "condition", {}, tag);
      for (int trial = 0; trial < trials; ++trial) {
        const SlowWander wander(wobble_nm, 0.2, 1.5, rng);
        const SlowWander loading(disturbance, 0.05, 0.8, rng);
        const std::int64_t t_trial = k0 * tick_us;
        const std::int64_t t_hold = t_trial + seconds_to_us(rest_s);
        const std::int64_t t_post = t_hold + seconds_to_us(hold_s);
        const std::int64_t t_end = k0 * tick_us + trial_ticks * tick_us;
        const std::map<std::string, double> idx{{"trial", trial}};

        out.begin(t_trial, "trial", idx, tag);
        out.begin(t_trial, "rest", idx, tag);
        out.end(t_hold, "rest", idx, tag);
        out.begin(t_hold, "hold", idx, {{"condition", cond}});
        out.end(t_post, "hold", idx, tag);
        out.begin(t_post, "rest", idx, tag);
        out.end(t_end, "rest", idx, tag);
        out.end(t_end, "trial", idx, tag);

        // The last tick of a trial doubles as the first tick of the next one.
        const long long last = trial + 1 == trials ? trial_ticks : trial_ticks - 1;
        for (long long i = 0; i <= last; ++i) {
          const std::int64_t t = (k0 + i) * tick_us;
          const double local = static_cast<double>(i) / truth_rate;
          const double envelope = smooth((local - rest_s) / ramp_s) * (1.0 - smooth((local - rest_s - hold_s) / ramp_s));
          const double torque = envelope * (target_nm + wander(local));
          out.channel("torque", Unit::newton_metre, truth_rate, t, torque);
          if ((k0 + i) % decim == 0) {
            const double force = std::max(0.0, gain * torque + loading(local));
            out.channel("pad_force", Unit::newton, kPadRateHz, t, force);
            out.pressure(t, measure_pressure(force, 0.0, pad, rng));
          }
        }
        k0 += trial_ticks;
      }
      out.end(k0 * tick_us, "condition", {}, tag);
    }
  }
}

// --- bicep curls and squats -------------------------------------------------

double checked_mass(double m, const SteadyStateTable& table) {
  for (const auto& [mass, row] : table.rows()) {
    if (std::abs(mass - m) < 1e-9) return mass;
  }
  throw Error(Errc::bad_params, "mass " + format_number(m) + " kg has no steady-state table row");
}

SteadyStateTable table_from(Params& prm) {
  const auto defaults = SteadyStateTable::defaults();
  const auto angles = prm.list("table_angles", defaults.angles());
  std::map<double, std::vector<double>> rows;
  for (const auto& [mass, row] : defaults.rows()) {
    rows[mass] = prm.list("table_" + format_number(mass), row);
  }
  return SteadyStateTable(angles, std::move(rows));
}

class Clock50 {
 public:
  std::int64_t now() const { return k_ * period_us(kPadRateHz); }
  double seconds() const { return static_cast<double>(k_) / kPadRateHz; }
  void tick() { ++k_; }

 private:
  long long k_ = 0;
};

void emit_limb(Builder& out, const Clock50& clock, double angle, double force, const PadParams& pad, Rng& rng) {
  out.channel("angle", Unit::degree, kPadRateHz, clock.now(), angle);
  out.channel("pad_force", Unit::newton, kPadRateHz, clock.now(), force);
  out.pressure(clock.now(), measure_pressure(force, 0.0, pad, rng));
}

void run_bicep_full(Builder& out, Params& prm, const PadParams& pad, Rng& rng) {
  const auto table = table_from(prm);
  const auto masses = prm.list("masses", {0.0, 0.5, 1.0, 2.27, 4.54});
  const int cycles = prm.count("cycles", 5);
  const double cycle_s = prm.positive("cycle_s", 4.0);
  const double rest_s = prm.positive("rest_s", 3.0);
  const double angle_min = prm.num("angle_min_deg", 90.0);
  const double angle_max = prm.num("angle_max_deg", 150.0);
  const double variability = prm.non_negative("variability", 0.005);
  std::normal_distribution<double> z(0.0, 1.0);

  Clock50 clock;
  const long long cycle_ticks = ticks_for(cycle_s, kPadRateHz);
  for (double m_in : masses) {
    const double m = checked_mass(m_in, table);
    const std::map<std::string, double> mass{{"mass_kg", m}};
    out.begin(clock.now(), "block", mass);
    out.begin(clock.now(), "rest", mass);
    for (long long i = 0; i < ticks_for(rest_s, kPadRateHz); ++i, clock.tick()) {
      emit_limb(out, clock, angle_min, table.force(angle_min, m), pad, rng);
    }
    out.end(clock.now(), "rest", mass);
    for (int c = 0; c < cycles; ++c) {
      const double scale = std::max(0.0, 1.0 + variability * z(rng));
      out.begin(clock.now(), "cycle", {{"mass_kg", m}, {"cycle", c}});
      for (long long i = 0; i < cycle_ticks; ++i, clock.tick()) {
        const double phase = static_cast<double>(i) / static_cast<double>(cycle_ticks);
        const double angle = angle_min + (angle_max - angle_min) * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
        emit_limb(out, clock, angle, scale * table.force(angle, m), pad, rng);
      }
      out.end(clock.now(), "cycle", {{"mass_kg", m}, {"cycle", c}});
    }
    // Closing sample at rest so the last cycle's end is covered.
    emit_limb(out, clock, angle_min, table.force(angle_min, m), pad, rng);
    clock.tick();
    out.end(clock.now(), "block", mass);
  }
}

void run_bicep_stepwise(Builder& out, Params& prm, const PadParams& pad, Rng& rng) {
  const auto table = table_from(prm);
  const auto masses = prm.list("masses", {0.0, 0.5, 1.0, 2.27, 4.54});
  const auto angles = prm.list("hold_angles_deg", {120.0, 135.0, 150.0});
  const int cycles = prm.count("cycles", 5);
  const double hold_s = prm.positive("hold_s", 4.0);
  const double transition_s = prm.positive("transition_s", 1.0);
  const double rest_s = prm.positive("rest_s", 3.0);
  const double angle_min = prm.num("angle_min_deg", 90.0);
  const double variability = prm.non_negative("variability", 0.08);
  const double tremor_n = prm.non_negative("tremor_n", 0.2);
  std::normal_distribution<double> z(0.0, 1.0);

  // AR(1) tremor with stationary standard deviation tremor_n.
  constexpr double rho = 0.9;
  double tremor = 0.0;
  auto next_tremor = [&] {
    tremor = rho * tremor + tremor_n * std::sqrt(1.0 - rho * rho) * z(rng);
    return tremor;
  };

  Clock50 clock;
  for (double m_in : masses) {
    const double m = checked_mass(m_in, table);
    const std::map<std::string, double> mass{{"mass_kg", m}};
    out.begin(clock.now(), "block", mass);
    out.begin(clock.now(), "rest", mass);
    for (long long i = 0; i < ticks_for(rest_s, kPadRateHz); ++i, clock.tick()) {
      emit_limb(out, clock, angle_min, table.force(angle_min, m) + next_tremor(), pad, rng);
    }
    out.end(clock.now(), "rest", mass);

    for (int c = 0; c < cycles; ++c) {
      out.begin(clock.now(), "cycle", {{"mass_kg", m}, {"cycle", c}});
      double prev_angle = angle_min;
      double prev_scale = 1.0;
      auto move_to = [&](double target_angle, double target_scale) {
        const long long n = ticks_for(transition_s, kPadRateHz);
        for (long long i = 0; i < n; ++i, clock.tick()) {
          const double u = smooth(static_cast<double>(i) / static_cast<double>(n));
          const double angle = prev_angle + u * (target_angle - prev_angle);
          const double scale = prev_scale + u * (target_scale - prev_scale);
          emit_limb(out, clock, angle, std::max(0.0, scale * table.force(angle, m) + next_tremor()), pad, rng);
        }
        prev_angle = target_angle;
        prev_scale = target_scale;
      };
      for (double angle : angles) {
        const double scale = std::max(0.0, 1.0 + variability * z(rng));
        move_to(angle, scale);
        const std::map<std::string, double> attrs{{"mass_kg", m}, {"angle_deg", angle}, {"cycle", c}};
        out.begin(clock.now(), "hold", attrs);
        for (long long i = 0; i < ticks_for(hold_s, kPadRateHz); ++i, clock.tick()) {
          emit_limb(out, clock, angle, std::max(0.0, scale * table.force(angle, m) + next_tremor()), pad, rng);
        }
        out.end(clock.now(), "hold", attrs);
      }
      move_to(angle_min, 1.0);
      out.end(clock.now(), "cycle", {{"mass_kg", m}, {"cycle", c}});
    }
    emit_limb(out, clock, angle_min, table.force(angle_min, m) + next_tremor(), pad, rng);
    clock.tick();
    out.end(clock.now(), "block", mass);
  }
}

void run_squats(Builder& out, Params& prm, const PadParams& pad, Rng& rng) {
  const double stand_s = prm.positive("stand_s", 4.0);
  const int reps = prm.count("reps", 10);
  const double cycle_s = prm.positive("cycle_s", 2.0);
  const double depth = prm.positive("depth_deg", 90.0);
  const double gain = prm.non_negative("gain_n_per_deg", 0.1448);
  const double variability = prm.non_negative("variability", 0.05);
  std::normal_distribution<double> z(0.0, 1.0);

  Clock50 clock;
  auto emit = [&](double angle, double force) {
    out.channel("angle", Unit::degree, kPadRateHz, clock.now(), angle);
    out.channel("pad_force", Unit::newton, kPadRateHz, clock.now(), force);
    out.pressure(clock.now(), measure_pressure(force, 0.0, pad, rng));
    clock.tick();
  };

  out.begin(clock.now(), "rest");
  for (long long i = 0; i < ticks_for(stand_s, kPadRateHz); ++i) emit(0.0, 0.0);
  out.end(clock.now(), "rest");
  const long long cycle_ticks = ticks_for(cycle_s, kPadRateHz);
  for (int c = 0; c < reps; ++c) {
    const double scale = std::max(0.0, 1.0 + variability * z(rng));
    out.begin(clock.now(), "cycle", {{"cycle", c}});
    for (long long i = 0; i < cycle_ticks; ++i) {
      const double phase = static_cast<double>(i) / static_cast<double>(cycle_ticks);
      const double angle = depth * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
      emit(angle, scale * gain * angle);
    }
    out.end(clock.now(), "cycle", {{"cycle", c}});
  }
  emit(0.0, 0.0);
}

}  // namespace

std::string_view scenario_name(ScenarioKind kind) noexcept {
  for (const auto& [k, name] : kScenarios) {
    if (k == kind) return name;
  }
  return "unknown";
}

ScenarioKind parse_scenario(std::string_view name) {
  for (const auto& [k, n] : kScenarios) {
    if (n == name) return k;
  }
  throw Error(Errc::unknown_scenario, "unknown scenario '" + std::string(name) + "'");
}

std::vector<std::string_view> scenario_names() {
  std::vector<std::string_view> out;
  for (const auto& [k, n] : kScenarios) out.push_back(n);
  return out;
}

std::string condition_name(std::string_view direction, std::string_view location) {
  return std::string(direction) + "_" + std::string(location);
}

SteadyStateTable::SteadyStateTable(std::vector<double> angles_deg, std::map<double, std::vector<double>> force_by_mass)
    : angles_(std::move(angles_deg)), rows_(std::move(force_by_mass)) {
  if (angles_.size() < 2 || !std::is_sorted(angles_.begin(), angles_.end()) ||
      std::adjacent_find(angles_.begin(), angles_.end()) != angles_.end()) {
    throw Error(Errc::bad_params, "table angles must be strictly increasing (at least two)");
  }
  for (const auto& [mass, row] : rows_) {
    if (row.size() != angles_.size()) {
      throw Error(Errc::bad_params, "table row for " + format_number(mass) + " kg has the wrong length");
    }
    for (double f : row) {
      if (!(f >= 0.0) || !std::isfinite(f)) throw Error(Errc::bad_params, "table forces must be finite and >= 0");
    }
  }
}

SteadyStateTable SteadyStateTable::defaults() {
  // Pad force (N) above the resting strap preload. With a = 30.7 Pa/N the
  // 150 deg column gives peaks of 2000, 800, 1200, 680 and 600 Pa.
  return SteadyStateTable({90.0, 120.0, 135.0, 150.0},
                          {
                              {0.0, {0.0, 22.801, 42.345, 65.147}},
                              {0.5, {0.0, 9.772, 15.635, 26.059}},
                              {1.0, {0.0, 14.658, 26.059, 39.088}},
                              {2.27, {0.0, 9.121, 14.658, 22.150}},
                              {4.54, {0.0, 7.818, 13.029, 19.544}},
                          });
}

double SteadyStateTable::force(double angle_deg, double mass_kg) const {
  const auto row_it = std::find_if(rows_.begin(), rows_.end(),
                                   [&](const auto& kv) { return std::abs(kv.first - mass_kg) < 1e-9; });
  if (row_it == rows_.end()) throw Error(Errc::bad_params, "no table row for mass " + format_number(mass_kg));
  const auto& row = row_it->second;
  if (angle_deg <= angles_.front()) return row.front();
  if (angle_deg >= angles_.back()) return row.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(angles_.begin(), angles_.end(), angle_deg) - angles_.begin());
  const double u = (angle_deg - angles_[hi - 1]) / (angles_[hi] - angles_[hi - 1]);
  return row[hi - 1] + u * (row[hi] - row[hi - 1]);
}

SessionData run_scenario(const Scenario& scenario, const PadParams& params) {
  params.validate();
  Rng rng(scenario.seed);
  Params prm(scenario.params);
  Builder out;
  switch (scenario.kind) {
    case ScenarioKind::ramp_hold_unload: run_compression(out, prm, params, rng, 100.0, 10.0); break;
    case ScenarioKind::step_hold_relax: run_compression(out, prm, params, rng, 20.0, 120.0); break;
    case ScenarioKind::dynamometer_trial: run_dynamometer(out, prm, params, rng); break;
    case ScenarioKind::bicep_full_cycles: run_bicep_full(out, prm, params, rng); break;
    case ScenarioKind::bicep_stepwise: run_bicep_stepwise(out, prm, params, rng); break;
    case ScenarioKind::squats: run_squats(out, prm, params, rng); break;
  }

  SessionData data;
  data.kind = scenario.kind;
  data.seed = scenario.seed;
  data.pad = params;
  data.params = prm.take();
  data.pressure = TimeSeries::from_us(std::move(out.p_t), std::move(out.p_v), Unit::pascal, kPadRateHz);
  for (auto& [name, ch] : out.truth) {
    data.truth.emplace(name, TimeSeries::from_us(std::move(ch.t), std::move(ch.v), ch.unit, ch.rate));
  }
  sort_events(out.events);
  data.events = std::move(out.events);
  return data;
}

SessionData run_scenario(ScenarioKind kind, const KeyValueConfig& config, std::uint64_t seed) {
  Scenario scenario{kind, config, seed};
  const PadParams pad = PadParams::from_config(scenario.params);
  SessionData data = run_scenario(scenario, pad);
  scenario.params.reject_unused();
  return data;
}

}  // namespace innervsense
