#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "innervsense/time_series.hpp"

namespace innervsense {

inline constexpr std::size_t kCyclePoints = 100;
inline constexpr std::size_t kMinCycleSamples = 10;

struct CycleSet {
  std::vector<TimeSeries> cycles;
  std::vector<std::pair<double, double>> source_boundaries;
  std::vector<std::vector<double>> normalized;  // n_cycles x n_points, empty until normalized
  std::vector<double> grid;                     // percent of cycle, 0..100
};

// Cuts x into the samples with start <= t < end for each boundary pair.
// Boundaries must be increasing, non-overlapping and inside the series span.
// Throws Errc::boundary_out_of_range, Errc::too_short_cycle (< 10 samples).
CycleSet segment_cycles(const TimeSeries& x, std::span<const std::pair<double, double>> boundaries);

// Linear interpolation of one cycle (times t, values v) onto n_points
// positions evenly spaced from its first to its last sample, both included.
std::vector<double> normalize_row(std::span<const double> t, std::span<const double> v, std::size_t n_points);

// Fills cs.normalized and cs.grid. Throws Errc::too_short_cycle (< 2 samples).
CycleSet normalize_cycles(CycleSet cs, std::size_t n_points = kCyclePoints);

struct Ensemble {
  std::vector<double> mean;
  std::vector<double> sd;  // n - 1 denominator; zero for a single cycle
};

// Throws Errc::empty_cycle_set.
Ensemble ensemble_stats(const CycleSet& cs);

struct SteadyState {
  double value = 0.0;         // window mean
  double window_start = 0.0;  // s
  double window_len = 0.0;    // s
  double cov = 0.0;           // sd / |mean| over the window
  std::size_t first_index = 0;
  std::size_t n_samples = 0;
};

inline constexpr double kCovEpsilon = 1e-9;

// Slides a window of round(window_len * fs) samples one sample at a time and
// keeps the one with the smallest sd / (|mean| + 1e-9), earliest on ties.
// Throws Errc::series_too_short, Errc::non_uniform_sampling.
SteadyState steady_state_cov(const TimeSeries& x, double window_len_s = 2.0);

}  // namespace innervsense
