#pragma once

#include <array>
#include <span>
#include <vector>

#include "innervsense/time_series.hpp"

namespace innervsense {

// Second-order Butterworth lowpass, applied forward then backward.
struct FilterSpec {
  double cutoff_hz = 6.0;
  double sample_rate_hz = 50.0;
};

// Normalized biquad: y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2].
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};  // a1, a2
};

// Bilinear transform with the cutoff prewarped, so a single pass is -3 dB at
// the cutoff (the forward-backward pair is -6 dB there).
Biquad butterworth_lowpass(const FilterSpec& spec);

// Number of edge samples mirrored on each side before filtering: three times
// the number of samples the pole envelope needs to fall below 1e-6, capped
// at n - 1.
std::size_t filter_padding(const FilterSpec& spec, std::size_t n);

// Zero-phase filtering of raw samples. Throws Errc::cutoff_out_of_range,
// Errc::too_few_samples (fewer than 6).
std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec);

// Checks the series is uniform at spec.sample_rate_hz within 1 % and filters.
// Throws Errc::non_uniform_sampling.
TimeSeries lowpass_zero_phase(const TimeSeries& x, const FilterSpec& spec);

// x minus its mean over [t0, t1]. Throws Errc::window_out_of_range,
// Errc::too_few_samples (fewer than 10 in the window).
TimeSeries offset_by_rest(const TimeSeries& x, double t0_s, double t1_s);

// Linear interpolation onto a uniform grid from the first to the last
// timestamp. Throws Errc::empty_series, Errc::bad_params.
TimeSeries resample(const TimeSeries& x, double target_rate_hz);

// Nominal sample rate: the rate hint when present, else from the median step.
double sample_rate_of(const TimeSeries& x);

}  // namespace innervsense
