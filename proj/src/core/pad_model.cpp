#include "innervsense/pad_model.hpp"

#include <algorithm>
#include <cmath>

#include "innervsense/config.hpp"
#include "innervsense/error.hpp"

namespace innervsense {

void PadParams::validate() const {
  const double all[] = {a, b, tau, r, p_sat, k1, k3, c_h, kappa_bend, noise_sigma};
  for (double v : all) {
    if (!std::isfinite(v)) throw Error(Errc::bad_params, "pad parameters must be finite");
  }
  if (!(a > 0.0)) throw Error(Errc::bad_params, "a must be > 0");
  if (!(tau > 0.0)) throw Error(Errc::bad_params, "tau must be > 0");
  if (r < 0.0 || r > 1.0) throw Error(Errc::bad_params, "r must lie in [0, 1]");
  if (!(p_sat > 0.0)) throw Error(Errc::bad_params, "p_sat must be > 0");
  if (noise_sigma < 0.0) throw Error(Errc::bad_params, "noise_sigma must be >= 0");
  if (k1 < 0.0 || k3 < 0.0 || k1 + k3 <= 0.0) throw Error(Errc::bad_params, "stiffness must be positive");
  if (c_h < 0.0) throw Error(Errc::bad_params, "c_h must be >= 0");
}

PadParams PadParams::from_config(const KeyValueConfig& cfg) {
  PadParams p;
  p.a = cfg.get_double("a", p.a);
  p.b = cfg.get_double("b", p.b);
  p.tau = cfg.get_double("tau", p.tau);
  p.r = cfg.get_double("r", p.r);
  p.p_sat = cfg.get_double("p_sat", p.p_sat);
  p.k1 = cfg.get_double("k1", p.k1);
  p.k3 = cfg.get_double("k3", p.k3);
  p.c_h = cfg.get_double("c_h", p.c_h);
  p.kappa_bend = cfg.get_double("kappa_bend", p.kappa_bend);
  p.noise_sigma = cfg.get_double("noise_sigma", p.noise_sigma);
  p.validate();
  return p;
}

double elastic_force(double d_mm, const PadParams& p) noexcept {
  return p.k1 * d_mm + p.k3 * d_mm * d_mm * d_mm;
}

double compression_for_force(double force_n, const PadParams& p) {
  if (!std::isfinite(force_n)) throw Error(Errc::non_finite_input, "force is not finite");
  if (force_n <= 0.0) return 0.0;
  // Monotone cubic: Newton from an upper bracket converges without overshoot.
  double d = std::max(force_n / std::max(p.k1, 1e-12), 0.0);
  if (p.k3 > 0.0) d = std::min(d, std::cbrt(force_n / p.k3));
  for (int i = 0; i < 100; ++i) {
    const double g = elastic_force(d, p) - force_n;
    const double dg = p.k1 + 3.0 * p.k3 * d * d;
    const double step = g / dg;
    d -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, d)) break;
  }
  return std::max(d, 0.0);
}

double raw_pressure(double force_n, double bend_deg, const PadParams& p) noexcept {
  return p.a * std::max(force_n, 0.0) + p.b - p.kappa_bend * bend_deg;
}

double measure_pressure(double force_n, double bend_deg, const PadParams& p, Rng& rng) {
  double pressure = raw_pressure(force_n, bend_deg, p);
  if (p.noise_sigma > 0.0) pressure += std::normal_distribution<double>(0.0, p.noise_sigma)(rng);
  return std::min(pressure, p.p_sat);
}

PadStep step_pad(const PadState& state, const PadInput& input, double dt_s, const PadParams& params, Rng& rng) {
  if (!std::isfinite(input.d_next_mm) || !std::isfinite(input.bend_deg)) {
    throw Error(Errc::non_finite_input, "pad input is not finite");
  }
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw Error(Errc::bad_params, "dt must be > 0");

  const double d_next = std::max(input.d_next_mm, 0.0);
  const double fe_now = elastic_force(state.d_mm, params);
  const double fe_next = elastic_force(d_next, params);

  PadStep out;
  out.state.d_mm = d_next;
  out.state.t_s = state.t_s + dt_s;
  out.state.f_relax_n =
      std::max(0.0, state.f_relax_n * std::exp(-dt_s / params.tau) + (1.0 - params.r) * (fe_next - fe_now));

  const double f_static = params.r * fe_next + out.state.f_relax_n;
  const double f_rate = std::max(params.c_h * (d_next - state.d_mm) / dt_s, -f_static);
  out.force_n = f_static + f_rate;
  out.pressure_pa = measure_pressure(out.force_n, input.bend_deg, params, rng);
  return out;
}

}  // namespace innervsense
