#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "innervsense/dsp.hpp"
#include "test_support.hpp"

using namespace innervsense;

namespace {

constexpr double kPi = std::numbers::pi;

// Two-pass Butterworth magnitude after the bilinear transform.
double two_pass_gain(double f, double fs, double fc) {
  const double r = std::tan(kPi * f / fs) / std::tan(kPi * fc / fs);
  return 1.0 / (1.0 + std::pow(r, 4));
}

std::vector<double> sine(double f, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * f * static_cast<double>(i) / fs + phase);
  return x;
}

// Amplitude of the f-component over [lo, hi) by least squares on sin/cos.
double amplitude(const std::vector<double>& y, double f, double fs, std::size_t lo, std::size_t hi) {
  double ss = 0, cc = 0, sc = 0, ys = 0, yc = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double w = 2.0 * kPi * f * static_cast<double>(i) / fs;
    const double s = std::sin(w), c = std::cos(w);
    ss += s * s;
    cc += c * c;
    sc += s * c;
    ys += y[i] * s;
    yc += y[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

TimeSeries uniform(const std::vector<double>& v, double fs, Unit unit = Unit::pascal) {
  std::vector<std::int64_t> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = std::llround(static_cast<double>(i) * 1e6 / fs);
  return TimeSeries::from_us(t, v, unit, fs);
}

}  // namespace

TEST_CASE("analytic oracle values") {
  CHECK(two_pass_gain(1.0, 50.0, 6.0) == doctest::Approx(0.9993628144788713).epsilon(1e-14));
  CHECK(two_pass_gain(6.0, 50.0, 6.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two_pass_gain(20.0, 50.0, 6.0) == doctest::Approx(0.0002738105177985636).epsilon(1e-12));
}

TEST_CASE("biquad coefficients") {
  const Biquad q = butterworth_lowpass(FilterSpec{6.0, 50.0});
  CHECK(q.b[0] == doctest::Approx(0.09131490043583196).epsilon(1e-13));
  CHECK(q.b[1] == doctest::Approx(0.18262980087166392).epsilon(1e-13));
  CHECK(q.b[2] == doctest::Approx(0.09131490043583196).epsilon(1e-13));
  CHECK(q.a[0] == doctest::Approx(-0.9824057931083952).epsilon(1e-13));
  CHECK(q.a[1] == doctest::Approx(0.34766539485172315).epsilon(1e-13));

  // |H|^2 of one pass equals the amplitude gain of two passes.
  for (double f : {0.5, 1.0, 3.0, 6.0, 10.0, 20.0, 24.0}) {
    const std::complex<double> z = std::polar(1.0, -2.0 * kPi * f / 50.0);
    const auto h = (q.b[0] + q.b[1] * z + q.b[2] * z * z) / (1.0 + q.a[0] * z + q.a[1] * z * z);
    CHECK(std::norm(h) == doctest::Approx(two_pass_gain(f, 50.0, 6.0)).epsilon(1e-10));
  }
}

TEST_CASE("filter spec checks") {
  const std::vector<double> x(100, 1.0);
  CHECK_ERRC(filtfilt(x, FilterSpec{0.0, 50.0}), Errc::cutoff_out_of_range);
  CHECK_ERRC(filtfilt(x, FilterSpec{25.0, 50.0}), Errc::cutoff_out_of_range);
  CHECK_ERRC(filtfilt(x, FilterSpec{-1.0, 50.0}), Errc::cutoff_out_of_range);
  CHECK_ERRC(filtfilt(std::vector<double>(5, 1.0), FilterSpec{}), Errc::too_few_samples);
  CHECK(filter_padding(FilterSpec{}, 10) == 9);
  CHECK(filter_padding(FilterSpec{}, 100000) > 6);
}

TEST_CASE("dc gain is one") {
  for (std::size_t n : {6u, 7u, 20u, 501u, 5000u}) {
    const std::vector<double> x(n, 42.0);
    for (double y : filtfilt(x, FilterSpec{})) REQUIRE(std::abs(y - 42.0) <= 1e-9);
  }
}

TEST_CASE("sine gains follow the two-pass oracle") {
  const double fs = 50.0;
  for (double f : {0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 20.0}) {
    CAPTURE(f);
    const auto x = sine(f, fs, 3000, 1.0, 0.3);
    const auto y = filtfilt(x, FilterSpec{6.0, fs});
    const double g = amplitude(y, f, fs, 500, 2500);
    CHECK(g == doctest::Approx(two_pass_gain(f, fs, 6.0)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("passband and stopband thresholds") {
  const auto x1 = sine(1.0, 50.0, 1000);
  const double g1 = amplitude(filtfilt(x1, FilterSpec{}), 1.0, 50.0, 200, 800);
  CHECK(g1 >= 0.99);
  CHECK(g1 <= 1.01);
  const auto x20 = sine(20.0, 50.0, 1000);
  const double g20 = amplitude(filtfilt(x20, FilterSpec{}), 20.0, 50.0, 200, 800);
  CHECK(-20.0 * std::log10(g20) >= 30.0);
}

TEST_CASE("zero phase: a symmetric pulse keeps its peak") {
  std::vector<double> x(401, 0.0);
  for (int i = -20; i <= 20; ++i) x[200 + i] = std::exp(-0.5 * (i / 6.0) * (i / 6.0));
  const auto y = filtfilt(x, FilterSpec{});
  const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
  CHECK(peak == 200);
  for (int i = 1; i < 50; ++i) CHECK(y[200 - i] == doctest::Approx(y[200 + i]).epsilon(1e-9));
}

TEST_CASE("filter is linear") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(300), y(300), z(300);
    const double a = n(rng), b = n(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = n(rng) + 5.0;
      z[i] = a * x[i] + b * y[i];
    }
    const auto fx = filtfilt(x, FilterSpec{}), fy = filtfilt(y, FilterSpec{}), fz = filtfilt(z, FilterSpec{});
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(fz[i] - (a * fx[i] + b * fy[i])) <= 1e-9);
  }
}

TEST_CASE("filter commutes with time reversal") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(250 + trial);
    for (auto& v : x) v = n(rng);
    auto fx = filtfilt(x, FilterSpec{});
    std::vector<double> rx(x.rbegin(), x.rend());
    const auto frx = filtfilt(rx, FilterSpec{});
    std::reverse(fx.begin(), fx.end());
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(frx[i] - fx[i]) <= 1e-9);
  }
}

TEST_CASE("lowpass on a series checks sampling") {
  const auto ts = uniform(sine(1.0, 50.0, 200), 50.0);
  const auto y = lowpass_zero_phase(ts, FilterSpec{});
  CHECK(y.size() == ts.size());
  CHECK(std::equal(y.t_us().begin(), y.t_us().end(), ts.t_us().begin()));
  CHECK(y.unit() == ts.unit());
  CHECK_ERRC(lowpass_zero_phase(uniform(sine(1.0, 100.0, 200), 100.0), FilterSpec{}), Errc::non_uniform_sampling);

  std::vector<std::int64_t> t;
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) {
    t.push_back(i * 20000 + (i == 50 ? 5000 : 0));
    v.push_back(1.0);
  }
  CHECK_ERRC(lowpass_zero_phase(TimeSeries::from_us(t, v, Unit::pascal, 50.0), FilterSpec{}), Errc::non_uniform_sampling);
}

TEST_CASE("offset by rest") {
  SUBCASE("constant goes to zero") {
    const auto y = offset_by_rest(uniform(std::vector<double>(200, 100.0), 50.0), 0.5, 2.0);
    for (double v : y.values()) CHECK(v == 0.0);
  }
  SUBCASE("ramp minus its window mean") {
    std::vector<double> x(201);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 50.0;
    const auto y = offset_by_rest(uniform(x, 50.0), 0.0, 2.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value(i) == doctest::Approx(x[i] - 1.0));
  }
  SUBCASE("window mean is zero afterwards") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(500.0, 50.0);
    std::vector<double> x(300);
    for (auto& v : x) v = n(rng);
    const auto y = offset_by_rest(uniform(x, 50.0), 0.5, 2.0);
    const auto w = y.slice(0.5, 2.0);
    double m = 0.0;
    for (double v : w.values()) m += v;
    CHECK(std::abs(m / static_cast<double>(w.size())) <= 1e-12 * 500.0);
  }
  SUBCASE("errors") {
    const auto ts = uniform(std::vector<double>(100, 1.0), 50.0);
    CHECK_ERRC(offset_by_rest(ts, 1.0, 3.0), Errc::window_out_of_range);
    CHECK_ERRC(offset_by_rest(ts, 1.0, 1.1), Errc::too_few_samples);
  }
}

TEST_CASE("resample") {
  SUBCASE("ramp is exact") {
    std::vector<double> x(1001);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 3.0 * static_cast<double>(i) / 100.0 - 7.0;
    const auto y = resample(uniform(x, 100.0), 50.0);
    CHECK(y.size() == 501);
    for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(y.value(i) == doctest::Approx(3.0 * y.t_s(i) - 7.0).epsilon(1e-12));
    CHECK(y.rate_hint().value_or(0.0) == 50.0);
  }
  SUBCASE("1000 Hz to 50 Hz sine") {
    const double amp = 7.5;
    const auto x = uniform(sine(2.0, 1000.0, 10001, amp), 1000.0);
    const auto y = resample(x, 50.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y.value(i) - amp * std::sin(2.0 * kPi * 2.0 * y.t_s(i))));
    CHECK(worst < 1e-3 * amp);
  }
  SUBCASE("same rate reproduces the samples") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    std::vector<double> x(500);
    for (auto& v : x) v = n(rng);
    const auto ts = uniform(x, 50.0);
    const auto y = resample(ts, 50.0);
    REQUIRE(y.size() == ts.size());
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y.value(i) == x[i]);
  }
  SUBCASE("single sample") {
    const auto y = resample(TimeSeries::from_us({5}, {3.0}, Unit::pascal), 50.0);
    CHECK(y.size() == 1);
    CHECK(y.value(0) == 3.0);
  }
  CHECK_ERRC(resample(TimeSeries(), 50.0), Errc::empty_series);
  CHECK_ERRC(resample(TimeSeries::from_us({0, 1}, {1.0, 2.0}, Unit::pascal), 0.0), Errc::bad_params);
  CHECK(sample_rate_of(uniform(std::vector<double>(10, 0.0), 100.0)) == 100.0);
}
