#include "innervsense/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "innervsense/dsp.hpp"
#include "innervsense/error.hpp"

namespace innervsense {

CycleSet segment_cycles(const TimeSeries& x, std::span<const std::pair<double, double>> boundaries) {
  CycleSet cs;
  if (boundaries.empty()) return cs;
  if (x.empty()) throw Error(Errc::boundary_out_of_range, "cannot segment an empty series");
  const auto t = x.t_us();
  double prev_end = x.start_s();
  for (const auto& [start, end] : boundaries) {
    if (!(start < end) || start < prev_end || start < x.start_s() || end > x.end_s()) {
      throw Error(Errc::boundary_out_of_range, "cycle boundaries must be increasing, disjoint and inside the series");
    }
    prev_end = end;
    const auto lo = std::lower_bound(t.begin(), t.end(), seconds_to_us(start));
    const auto hi = std::lower_bound(t.begin(), t.end(), seconds_to_us(end));
    const auto first = static_cast<std::size_t>(lo - t.begin());
    const auto last = static_cast<std::size_t>(hi - t.begin());
    if (last - first < kMinCycleSamples) throw Error(Errc::too_short_cycle, "cycle has fewer than 10 samples");
    std::vector<std::int64_t> ct(t.begin() + first, t.begin() + last);
    std::vector<double> cv(x.values().begin() + first, x.values().begin() + last);
    cs.cycles.push_back(TimeSeries::from_us(std::move(ct), std::move(cv), x.unit(), x.rate_hint()));
    cs.source_boundaries.emplace_back(start, end);
  }
  return cs;
}

std::vector<double> normalize_row(std::span<const double> t, std::span<const double> v, std::size_t n_points) {
  if (t.size() != v.size()) throw Error(Errc::length_mismatch, "t and v differ in length");
  if (t.size() < 2) throw Error(Errc::too_short_cycle, "a cycle needs at least 2 samples");
  if (n_points < 2) throw Error(Errc::bad_params, "need at least 2 normalized points");
  std::vector<double> row(n_points);
  const double t0 = t.front();
  const double span = t.back() - t0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < n_points; ++j) {
    if (j == 0) {
      row[j] = v.front();
      continue;
    }
    if (j + 1 == n_points) {
      row[j] = v.back();
      continue;
    }
    const double tj = t0 + span * static_cast<double>(j) / static_cast<double>(n_points - 1);
    while (k + 2 < t.size() && t[k + 1] <= tj) ++k;
    const double dt = t[k + 1] - t[k];
    const double w = dt > 0.0 ? (tj - t[k]) / dt : 0.0;
    row[j] = w == 0.0 ? v[k] : v[k] + w * (v[k + 1] - v[k]);
  }
  return row;
}

CycleSet normalize_cycles(CycleSet cs, std::size_t n_points) {
  cs.normalized.clear();
  cs.grid.resize(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    cs.grid[j] = n_points > 1 ? 100.0 * static_cast<double>(j) / static_cast<double>(n_points - 1) : 0.0;
  }
  for (const auto& c : cs.cycles) {
    const auto t = c.times_s();
    cs.normalized.push_back(normalize_row(t, c.values(), n_points));
  }
  return cs;
}

Ensemble ensemble_stats(const CycleSet& cs) {
  if (cs.normalized.empty()) throw Error(Errc::empty_cycle_set, "no normalized cycles");
  const std::size_t n_points = cs.normalized.front().size();
  const auto n = static_cast<double>(cs.normalized.size());
  Ensemble out{std::vector<double>(n_points, 0.0), std::vector<double>(n_points, 0.0)};
  for (std::size_t j = 0; j < n_points; ++j) {
    // Deviations from the first cycle keep identical cycles exact.
    const double ref = cs.normalized.front().at(j);
    double s = 0.0;
    for (const auto& row : cs.normalized) s += row.at(j) - ref;
    const double m = ref + s / n;
    double ss = 0.0;
    for (const auto& row : cs.normalized) ss += (row[j] - m) * (row[j] - m);
    out.mean[j] = m;
    out.sd[j] = cs.normalized.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return out;
}

SteadyState steady_state_cov(const TimeSeries& x, double window_len_s) {
  if (!(window_len_s > 0.0)) throw Error(Errc::bad_params, "window length must be positive");
  if (x.size() < 2) throw Error(Errc::series_too_short, "series shorter than the window");
  const double fs = sample_rate_of(x);
  const auto t = x.t_us();
  const double nominal_us = 1e6 / fs;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(static_cast<double>(t[i] - t[i - 1]) - nominal_us) > 0.01 * nominal_us) {
      throw Error(Errc::non_uniform_sampling, "steady-state search needs uniform sampling");
    }
  }
  const auto w = static_cast<std::size_t>(std::llround(window_len_s * fs));
  if (w < 2) throw Error(Errc::bad_params, "window shorter than two samples");
  if (x.size() < w) throw Error(Errc::series_too_short, "series shorter than the window");

  const auto v = x.values();
  const double center = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> s1(v.size() + 1, 0.0);
  std::vector<double> s2(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - center;
    s1[i + 1] = s1[i] + d;
    s2[i + 1] = s2[i] + d * d;
  }
  const auto wd = static_cast<double>(w);
  std::size_t best = 0;
  double best_cov = 0.0;
  for (std::size_t i = 0; i + w <= v.size(); ++i) {
    const double a = s1[i + w] - s1[i];
    const double var = std::max(0.0, (s2[i + w] - s2[i] - a * a / wd) / (wd - 1.0));
    const double cov = std::sqrt(var) / (std::abs(center + a / wd) + kCovEpsilon);
    if (i == 0 || cov < best_cov) {
      best = i;
      best_cov = cov;
    }
  }

  // Report statistics recomputed directly on the chosen window.
  const auto win = v.subspan(best, w);
  const double mean = std::accumulate(win.begin(), win.end(), 0.0) / wd;
  double ss = 0.0;
  for (double y : win) ss += (y - mean) * (y - mean);
  SteadyState out;
  out.value = mean;
  out.window_start = x.t_s(best);
  out.window_len = wd / fs;
  out.cov = std::sqrt(ss / (wd - 1.0)) / (std::abs(mean) + kCovEpsilon);
  out.first_index = best;
  out.n_samples = w;
  return out;
}

}  // namespace innervsense
