#include "innervsense/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "innervsense/error.hpp"

namespace innervsense {

namespace {

constexpr std::size_t kFilterOrder = 2;

void check_spec(const FilterSpec& spec) {
  if (!(spec.sample_rate_hz > 0.0) || !std::isfinite(spec.sample_rate_hz)) {
    throw Error(Errc::cutoff_out_of_range, "sample rate must be positive");
  }
  if (!(spec.cutoff_hz > 0.0) || !(spec.cutoff_hz < spec.sample_rate_hz / 2.0)) {
    throw Error(Errc::cutoff_out_of_range, "cutoff must lie in (0, fs/2)");
  }
}

// Direct form II transposed, starting from the steady state for a constant
// input equal to x[0].
void run_biquad(const Biquad& f, std::vector<double>& x) {
  if (x.empty()) return;
  const auto& [b0, b1, b2] = f.b;
  const auto& [a1, a2] = f.a;
  // Delay line at rest for a constant input x[0] (unit DC gain).
  double z1 = (1.0 - b0) * x[0];
  double z2 = (b2 - a2) * x[0];
  for (double& v : x) {
    const double in = v;
    const double out = b0 * in + z1;
    z1 = b1 * in - a1 * out + z2;
    z2 = b2 * in - a2 * out;
    v = out;
  }
}

}  // namespace

Biquad butterworth_lowpass(const FilterSpec& spec) {
  check_spec(spec);
  const double k = std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);
  const double q = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + q * k + k * k);
  Biquad f;
  f.b = {k * k * norm, 2.0 * k * k * norm, k * k * norm};
  f.a = {2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm};
  return f;
}

std::size_t filter_padding(const FilterSpec& spec, std::size_t n) {
  const Biquad f = butterworth_lowpass(spec);
  // Complex pole pair (Butterworth): radius = sqrt(a2).
  const double radius = std::sqrt(std::max(f.a[1], 1e-300));
  std::size_t characteristic = 3 * (kFilterOrder + 1);
  if (radius < 1.0 && radius > 0.0) {
    characteristic = std::max<std::size_t>(
        characteristic, static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(radius))));
  }
  const std::size_t pad = 3 * characteristic;
  return n == 0 ? 0 : std::min(pad, n - 1);
}

std::vector<double> filtfilt(std::span<const double> x, const FilterSpec& spec) {
  const Biquad f = butterworth_lowpass(spec);
  if (x.size() < 3 * kFilterOrder) {
    throw Error(Errc::too_few_samples, "need at least " + std::to_string(3 * kFilterOrder) + " samples to filter");
  }
  const std::size_t n = x.size();
  const std::size_t pad = filter_padding(spec, n);

  // Odd (point) reflection about each end sample keeps level and slope continuous.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_biquad(f, ext);
  std::reverse(ext.begin(), ext.end());
  run_biquad(f, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double sample_rate_of(const TimeSeries& x) {
  if (x.rate_hint()) return *x.rate_hint();
  if (x.size() < 2) throw Error(Errc::too_few_samples, "cannot infer a sample rate from fewer than 2 samples");
  std::vector<std::int64_t> dt(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) dt[i - 1] = x.t_us()[i] - x.t_us()[i - 1];
  std::nth_element(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2), dt.end());
  return 1e6 / static_cast<double>(dt[dt.size() / 2]);
}

TimeSeries lowpass_zero_phase(const TimeSeries& x, const FilterSpec& spec) {
  check_spec(spec);
  const double nominal_us = 1e6 / spec.sample_rate_hz;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double dt = static_cast<double>(x.t_us()[i] - x.t_us()[i - 1]);
    if (std::abs(dt - nominal_us) > 0.01 * nominal_us) {
      throw Error(Errc::non_uniform_sampling,
                  "sample " + std::to_string(i) + " is not at " + std::to_string(spec.sample_rate_hz) + " Hz");
    }
  }
  return x.with_values(filtfilt(x.values(), spec));
}

TimeSeries offset_by_rest(const TimeSeries& x, double t0_s, double t1_s) {
  if (x.empty() || t0_s > t1_s || seconds_to_us(t0_s) < x.t_us().front() || seconds_to_us(t1_s) > x.t_us().back()) {
    throw Error(Errc::window_out_of_range, "rest window outside series span");
  }
  const auto [first, last] = x.index_range(t0_s, t1_s);
  if (last - first < 10) throw Error(Errc::too_few_samples, "rest window holds fewer than 10 samples");
  const auto vals = x.values();
  const double mean = std::accumulate(vals.begin() + static_cast<std::ptrdiff_t>(first),
                                      vals.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
                      static_cast<double>(last - first);
  std::vector<double> out(vals.begin(), vals.end());
  for (double& v : out) v -= mean;
  return x.with_values(std::move(out));
}

TimeSeries resample(const TimeSeries& x, double target_rate_hz) {
  if (x.empty()) throw Error(Errc::empty_series, "cannot resample an empty series");
  if (!(target_rate_hz > 0.0) || !std::isfinite(target_rate_hz)) {
    throw Error(Errc::bad_params, "target rate must be positive");
  }
  auto grid = uniform_grid_us(x.t_us().front(), x.t_us().back(), target_rate_hz);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = x.at_us(grid[i]);
  return TimeSeries::from_us(std::move(grid), std::move(v), x.unit(), target_rate_hz);
}

}  // namespace innervsense
