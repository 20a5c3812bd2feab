#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "innervsense/time_series.hpp"

namespace innervsense {

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;  // 1 - SS_res/SS_tot; defined as 0 when SS_tot == 0
  std::size_t n = 0;
  double residual_sd = 0.0;  // sqrt(SS_res / (n - 2))
  bool degenerate_y = false; // SS_tot == 0
};

// Ordinary least squares on centered data. Throws Errc::length_mismatch,
// Errc::too_few_samples (n < 3), Errc::degenerate_x.
LinFit linfit(std::span<const double> x, std::span<const double> y);

// y = y_inf + amplitude * exp(-t / tau), with t as given.
struct ExpFit {
  double y_inf = 0.0;
  double amplitude = 0.0;
  double tau = 0.0;
  double rmse = 0.0;
  int iterations = 0;
};

// Least-squares exponential decay. A log-spaced scan over tau in
// [0.1, 10] x record span (linear solve for y_inf and amplitude at each tau)
// seeds a damped Gauss-Newton refinement, stopped when the relative step
// falls below 1e-10 or after 100 iterations.
// Throws Errc::too_few_samples (n < 10), Errc::range_error (t not strictly
// increasing), Errc::flat_signal, Errc::no_decay (no amplitude, or tau pinned
// at a search bound).
ExpFit expfit(std::span<const double> t, std::span<const double> y);

// Torque-pressure correlation over one or more trials of a condition. Each
// trial window is put on a common 50 Hz grid, offset by the mean over
// [start + rest.first, start + rest.second], lowpass filtered at `cutoff_hz`,
// and the trials are pooled into a single linear fit of pressure on torque.
// An empty window list treats the common span as one trial.
LinFit condition_correlation(const TimeSeries& torque, const TimeSeries& pressure,
                             std::span<const std::pair<double, double>> trial_windows,
                             std::pair<double, double> rest_window = {0.5, 2.0}, double cutoff_hz = 6.0);

}  // namespace innervsense
