#include "innervsense/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "innervsense/dsp.hpp"
#include "innervsense/error.hpp"

namespace innervsense {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct LinearPart {
  double c = 0.0;
  double a = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Best (c, a) for y ~ c + a*e with e fixed, via centered normal equations.
LinearPart solve_linear(std::span<const double> e, std::span<const double> y, double y_mean) {
  const double e_mean = mean_of(e);
  double see = 0.0;
  double sey = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    see += (e[i] - e_mean) * (e[i] - e_mean);
    sey += (e[i] - e_mean) * (y[i] - y_mean);
  }
  LinearPart out;
  out.a = see > 0.0 ? sey / see : 0.0;
  out.c = y_mean - out.a * e_mean;
  double sse = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double r = y[i] - out.c - out.a * e[i];
    sse += r * r;
  }
  out.sse = sse;
  return out;
}

double sse_of(std::span<const double> t, std::span<const double> y, double c, double a, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - c - a * std::exp(-t[i] / tau);
    s += r * r;
  }
  return s;
}

// Solves the 3x3 system m x = v by Gaussian elimination with partial pivoting.
bool solve3(double m[3][3], double v[3], double x[3]) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (m[piv][col] == 0.0) return false;
    std::swap(m[piv], m[col]);
    std::swap(v[piv], v[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 3; ++k) m[r][k] -= f * m[col][k];
      v[r] -= f * v[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = v[r];
    for (int k = r + 1; k < 3; ++k) s -= m[r][k] * x[k];
    x[r] = s / m[r][r];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

}  // namespace

LinFit linfit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::length_mismatch, "x and y differ in length");
  if (x.size() < 3) throw Error(Errc::too_few_samples, "linear fit needs at least 3 points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(Errc::degenerate_x, "x has zero variance");

  LinFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.residual_sd = std::sqrt(ss_res / static_cast<double>(fit.n - 2));
  if (syy > 0.0) {
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    fit.r2 = 0.0;
    fit.degenerate_y = true;
  }
  return fit;
}

ExpFit expfit(std::span<const double> t_in, std::span<const double> y) {
  if (t_in.size() != y.size()) throw Error(Errc::length_mismatch, "t and y differ in length");
  const std::size_t n = t_in.size();
  if (n < 10) throw Error(Errc::too_few_samples, "exponential fit needs at least 10 points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t_in[i] > t_in[i - 1])) throw Error(Errc::range_error, "t must be strictly increasing");
  }
  const double y_mean = mean_of(y);
  double var = 0.0;
  for (double v : y) var += (v - y_mean) * (v - y_mean);
  var /= static_cast<double>(n - 1);
  if (var <= 1e-12 * y_mean * y_mean) throw Error(Errc::flat_signal, "signal variance too small to identify tau");

  // Work relative to the first sample for conditioning.
  const double t0 = t_in[0];
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_in[i] - t0;
  const double span = t.back();
  const double tau_lo = 0.1 * span;
  const double tau_hi = 10.0 * span;

  constexpr int kGrid = 400;
  std::vector<double> e(n);
  double best_tau = tau_lo;
  LinearPart best;
  for (int g = 0; g < kGrid; ++g) {
    const double tau = tau_lo * std::pow(tau_hi / tau_lo, static_cast<double>(g) / (kGrid - 1));
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(-t[i] / tau);
    const LinearPart lp = solve_linear(e, y, y_mean);
    if (lp.sse < best.sse) {
      best = lp;
      best_tau = tau;
    }
  }
  const double y_scale = std::sqrt(var) + std::abs(y_mean);
  if (std::abs(best.a) * (1.0 - std::exp(-span / best_tau)) <= 1e-9 * y_scale) {
    throw Error(Errc::no_decay, "no exponential component in the signal");
  }

  double c = best.c;
  double a = best.a;
  double tau = best_tau;
  double sse = best.sse;
  double lambda = 0.0;
  int iter = 0;
  for (; iter < 100; ++iter) {
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double ei = std::exp(-t[i] / tau);
      const double r = y[i] - c - a * ei;
      const double j[3] = {1.0, ei, a * ei * t[i] / (tau * tau)};
      for (int p = 0; p < 3; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 3; ++q) jtj[p][q] += j[p] * j[q];
      }
    }
    bool accepted = false;
    double step[3] = {};
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      double m[3][3];
      double v[3];
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) m[p][q] = jtj[p][q];
        m[p][p] += lambda * jtj[p][p];
        v[p] = jtr[p];
      }
      if (!solve3(m, v, step)) {
        lambda = std::max(lambda * 10.0, 1e-6);
        continue;
      }
      const double tau_new = tau + step[2];
      const double sse_new = tau_new > 0.0 ? sse_of(t, y, c + step[0], a + step[1], tau_new)
                                           : std::numeric_limits<double>::infinity();
      // Close to the optimum the decrease drops below the rounding error of
      // the sum, so a small undamped step is taken as long as it does not
      // measurably increase the objective.
      const bool polishing = lambda == 0.0 && std::abs(step[2]) <= 1e-6 * tau && sse_new <= sse * (1.0 + 1e-12);
      if (sse_new <= sse || polishing) {
        c += step[0];
        a += step[1];
        tau = tau_new;
        sse = sse_new;
        lambda *= 0.1;
        if (lambda < 1e-12) lambda = 0.0;
        accepted = true;
      } else {
        lambda = std::max(lambda * 10.0, 1e-6);
      }
    }
    const bool small = std::abs(step[0]) <= 1e-10 * std::max(std::abs(c), y_scale) &&
                       std::abs(step[1]) <= 1e-10 * std::max(std::abs(a), y_scale) &&
                       std::abs(step[2]) <= 1e-10 * tau;
    if (!accepted || small) {
      ++iter;
      break;
    }
  }

  if (tau < tau_lo || tau > tau_hi) {
    throw Error(Errc::no_decay, "decay constant not identifiable within the record span");
  }
  ExpFit fit;
  fit.y_inf = c;
  fit.amplitude = a * std::exp(t0 / tau);
  fit.tau = tau;
  fit.rmse = std::sqrt(sse / static_cast<double>(n));
  fit.iterations = iter;
  return fit;
}

LinFit condition_correlation(const TimeSeries& torque, const TimeSeries& pressure,
                             std::span<const std::pair<double, double>> trial_windows,
                             std::pair<double, double> rest_window, double cutoff_hz) {
  if (torque.empty() || pressure.empty()) throw Error(Errc::empty_series, "torque and pressure must be non-empty");
  if (torque.unit() != Unit::newton_metre || pressure.unit() != Unit::pascal) {
    throw Error(Errc::unit_mismatch, "expected torque in Nm and pressure in Pa");
  }
  const double common_start = std::max(torque.start_s(), pressure.start_s());
  const double common_end = std::min(torque.end_s(), pressure.end_s());
  std::vector<std::pair<double, double>> windows(trial_windows.begin(), trial_windows.end());
  if (windows.empty()) windows.emplace_back(common_start, common_end);

  constexpr double kGridRate = 50.0;
  const FilterSpec spec{cutoff_hz, kGridRate};
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [start, end] : windows) {
    const double lo = std::max(start, common_start);
    const double hi = std::min(end, common_end);
    if (!(hi > lo)) throw Error(Errc::window_out_of_range, "trial window outside the common span");
    const auto grid_us = uniform_grid_us(seconds_to_us(lo), seconds_to_us(hi), kGridRate);
    std::vector<double> grid(grid_us.size());
    std::transform(grid_us.begin(), grid_us.end(), grid.begin(), us_to_seconds);
    const TimeSeries both[] = {torque, pressure};
    const AlignedTable table = merge_on_grid(both, grid);
    auto tq = TimeSeries::from_us(grid_us, table.columns[0], Unit::newton_metre, kGridRate);
    auto pr = TimeSeries::from_us(grid_us, table.columns[1], Unit::pascal, kGridRate);
    tq = lowpass_zero_phase(offset_by_rest(tq, lo + rest_window.first, lo + rest_window.second), spec);
    pr = lowpass_zero_phase(offset_by_rest(pr, lo + rest_window.first, lo + rest_window.second), spec);
    x.insert(x.end(), tq.values().begin(), tq.values().end());
    y.insert(y.end(), pr.values().begin(), pr.values().end());
  }
  return linfit(x, y);
}

}  // namespace innervsense
