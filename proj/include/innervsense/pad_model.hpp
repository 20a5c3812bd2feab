#pragma once

#include <random>

namespace innervsense {

class KeyValueConfig;

using Rng = std::mt19937_64;

// Calibration and material constants of the simulated pad.
struct PadParams {
  double a = 30.7;            // Pa/N, force-to-pressure slope
  double b = 13.9;            // Pa, intercept
  double tau = 26.6;          // s, stress-relaxation time constant
  double r = 0.5;             // retained force fraction after full relaxation
  double p_sat = 3114.0;      // Pa, transducer saturation ceiling
  double k1 = 5.0;            // N/mm
  double k3 = 0.19;           // N/mm^3
  double c_h = 2.0;           // N*s/mm, rate term (hysteresis)
  double kappa_bend = 0.5;    // Pa/deg, bending lowers the reading
  double noise_sigma = 5.0;   // Pa

  // Throws Errc::bad_params when an invariant is violated.
  void validate() const;

  // Reads the keys a, b, tau, r, p_sat, k1, k3, c_h, kappa_bend, noise_sigma.
  static PadParams from_config(const KeyValueConfig& cfg);

  friend bool operator==(const PadParams&, const PadParams&) = default;
};

struct PadState {
  double d_mm = 0.0;       // compression
  double f_relax_n = 0.0;  // relaxing share of the force
  double t_s = 0.0;
};

struct PadInput {
  double d_next_mm = 0.0;
  double bend_deg = 0.0;
};

struct PadStep {
  PadState state;
  double force_n = 0.0;
  double pressure_pa = 0.0;  // measured: noisy and saturated
};

double elastic_force(double d_mm, const PadParams& p) noexcept;

// Compression that produces the given elastic force (inverse of elastic_force).
double compression_for_force(double force_n, const PadParams& p);

// Noise-free reading before saturation: a*f + b - kappa_bend*bend.
double raw_pressure(double force_n, double bend_deg, const PadParams& p) noexcept;

// What the transducer reports for a force: raw pressure plus gaussian noise,
// clipped at p_sat.
double measure_pressure(double force_n, double bend_deg, const PadParams& p, Rng& rng);

// Advances the pad by one displacement-driven step of length dt.
//
// Force = r*f_e(d) + f_relax + c_h*(d_next - d)/dt, never negative, where the
// relaxing share gains (1 - r) of every elastic increment and decays as
// exp(-dt/tau). Under held compression the force therefore relaxes
// exponentially with time constant tau towards r*f_e(d). Pressure stays linear
// in force: a*f + b before bend, noise and saturation.
PadStep step_pad(const PadState& state, const PadInput& input, double dt_s, const PadParams& params, Rng& rng);

}  // namespace innervsense
