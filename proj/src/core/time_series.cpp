#include "innervsense/time_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "innervsense/error.hpp"

namespace innervsense {

std::int64_t seconds_to_us(double seconds) {
  if (!std::isfinite(seconds)) throw Error(Errc::non_finite_input, "time is not finite");
  return std::llround(seconds * 1e6);
}

TimeSeries TimeSeries::from_us(std::vector<std::int64_t> t_us, std::vector<double> values, Unit unit,
                               std::optional<double> rate_hint) {
  if (t_us.size() != values.size()) {
    throw Error(Errc::length_mismatch, "time and value arrays differ in length");
  }
  TimeSeries ts;
  ts.unit_ = unit;
  ts.rate_hint_ = rate_hint;
  ts.t_us_.reserve(t_us.size());
  ts.v_.reserve(values.size());
  for (std::size_t i = 0; i < t_us.size(); ++i) {
    if (!ts.t_us_.empty()) {
      if (t_us[i] < ts.t_us_.back()) throw Error(Errc::range_error, "timestamps decrease");
      if (t_us[i] == ts.t_us_.back()) continue;
    }
    ts.t_us_.push_back(t_us[i]);
    ts.v_.push_back(values[i]);
  }
  return ts;
}

TimeSeries TimeSeries::from_seconds(std::span<const double> t_s, std::span<const double> values, Unit unit,
                                    std::optional<double> rate_hint) {
  std::vector<std::int64_t> t(t_s.size());
  std::transform(t_s.begin(), t_s.end(), t.begin(), seconds_to_us);
  return from_us(std::move(t), std::vector<double>(values.begin(), values.end()), unit, rate_hint);
}

std::vector<double> TimeSeries::times_s() const {
  std::vector<double> out(t_us_.size());
  std::transform(t_us_.begin(), t_us_.end(), out.begin(), us_to_seconds);
  return out;
}

double TimeSeries::start_s() const {
  if (empty()) throw Error(Errc::empty_series, "series is empty");
  return us_to_seconds(t_us_.front());
}

double TimeSeries::end_s() const {
  if (empty()) throw Error(Errc::empty_series, "series is empty");
  return us_to_seconds(t_us_.back());
}

double TimeSeries::at_us(std::int64_t t) const {
  if (empty() || t < t_us_.front() || t > t_us_.back()) {
    throw Error(Errc::grid_out_of_range, "time " + std::to_string(us_to_seconds(t)) + " s outside series span");
  }
  const auto it = std::lower_bound(t_us_.begin(), t_us_.end(), t);
  const auto i = static_cast<std::size_t>(it - t_us_.begin());
  if (*it == t) return v_[i];
  const double frac = static_cast<double>(t - t_us_[i - 1]) / static_cast<double>(t_us_[i] - t_us_[i - 1]);
  return v_[i - 1] + frac * (v_[i] - v_[i - 1]);
}

std::pair<std::size_t, std::size_t> TimeSeries::index_range(double start_s, double end_s) const {
  const auto lo = std::lower_bound(t_us_.begin(), t_us_.end(), seconds_to_us(start_s));
  const auto hi = std::upper_bound(t_us_.begin(), t_us_.end(), seconds_to_us(end_s));
  const auto first = static_cast<std::size_t>(lo - t_us_.begin());
  const auto last = static_cast<std::size_t>(hi - t_us_.begin());
  return {first, std::max(first, last)};
}

TimeSeries TimeSeries::slice(double start_s, double end_s) const {
  const auto [first, last] = index_range(start_s, end_s);
  TimeSeries out;
  out.unit_ = unit_;
  out.rate_hint_ = rate_hint_;
  out.t_us_.assign(t_us_.begin() + static_cast<std::ptrdiff_t>(first), t_us_.begin() + static_cast<std::ptrdiff_t>(last));
  out.v_.assign(v_.begin() + static_cast<std::ptrdiff_t>(first), v_.begin() + static_cast<std::ptrdiff_t>(last));
  return out;
}

TimeSeries TimeSeries::with_values(std::vector<double> values) const {
  if (values.size() != v_.size()) throw Error(Errc::length_mismatch, "replacement values differ in length");
  TimeSeries out = *this;
  out.v_ = std::move(values);
  return out;
}

TimeSeries TimeSeries::converted(Unit unit, double factor) const {
  TimeSeries out = *this;
  out.unit_ = unit;
  for (double& v : out.v_) v *= factor;
  return out;
}

TimeSeries TimeSeries::shifted_in_time(double offset_s) const {
  TimeSeries out = *this;
  const auto off = seconds_to_us(offset_s);
  for (auto& t : out.t_us_) t += off;
  return out;
}

namespace {

template <class Op>
TimeSeries combine(const TimeSeries& a, const TimeSeries& b, Op op) {
  if (a.unit() != b.unit()) {
    throw Error(Errc::unit_mismatch, std::string(unit_name(a.unit())) + " vs " + std::string(unit_name(b.unit())));
  }
  if (!std::equal(a.t_us().begin(), a.t_us().end(), b.t_us().begin(), b.t_us().end())) {
    throw Error(Errc::grid_out_of_range, "series do not share a timebase");
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a.values()[i], b.values()[i]);
  return a.with_values(std::move(v));
}

}  // namespace

TimeSeries add(const TimeSeries& a, const TimeSeries& b) { return combine(a, b, std::plus<>{}); }
TimeSeries subtract(const TimeSeries& a, const TimeSeries& b) { return combine(a, b, std::minus<>{}); }

AlignedTable merge_on_grid(std::span<const TimeSeries> series, std::span<const double> grid_s) {
  AlignedTable table;
  table.grid_s.assign(grid_s.begin(), grid_s.end());
  std::vector<std::int64_t> grid(grid_s.size());
  std::transform(grid_s.begin(), grid_s.end(), grid.begin(), seconds_to_us);
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  for (const auto& s : series) {
    if (!grid.empty() && (s.empty() || *lo < s.t_us().front() || *hi > s.t_us().back())) {
      throw Error(Errc::grid_out_of_range, "grid exceeds a series' time span");
    }
    std::vector<double> column(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) column[i] = s.at_us(grid[i]);
    table.columns.push_back(std::move(column));
  }
  return table;
}

std::vector<std::int64_t> uniform_grid_us(std::int64_t start_us, std::int64_t end_us, double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(Errc::bad_params, "rate must be positive");
  std::vector<std::int64_t> grid;
  const double period_us = 1e6 / rate_hz;
  for (std::int64_t k = 0;; ++k) {
    const auto t = start_us + std::llround(static_cast<double>(k) * period_us);
    if (t > end_us) break;
    grid.push_back(t);
  }
  return grid;
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << "t_s," << unit_name(series.unit()) << '\n';
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto t = series.t_us()[i];
    const auto whole = t / 1'000'000;
    auto frac = t % 1'000'000;
    const bool negative = t < 0;
    if (frac < 0) frac = -frac;
    std::snprintf(buf, sizeof buf, "%s%lld.%06lld,", negative && whole == 0 ? "-" : "",
                  static_cast<long long>(whole), static_cast<long long>(frac));
    out << buf;
    const auto res = std::to_chars(buf, buf + sizeof buf, series.values()[i]);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

TimeSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io_error, "missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto comma = line.find(',');
  if (comma == std::string::npos || line.substr(0, comma) != "t_s") {
    throw Error(Errc::io_error, "CSV header must be 't_s,<unit>'");
  }
  const Unit unit = parse_unit(line.substr(comma + 1));
  std::vector<std::int64_t> t;
  std::vector<double> v;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = line.find(',');
    double ts = 0.0;
    double val = 0.0;
    const char* b = line.data();
    const char* e = b + line.size();
    if (c == std::string::npos || std::from_chars(b, b + c, ts).ec != std::errc{} ||
        std::from_chars(b + c + 1, e, val).ec != std::errc{}) {
      throw Error(Errc::io_error, "malformed CSV row " + std::to_string(row));
    }
    t.push_back(seconds_to_us(ts));
    v.push_back(val);
  }
  return TimeSeries::from_us(std::move(t), std::move(v), unit);
}

void write_csv_file(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  write_csv(out, series);
  if (!out) throw Error(Errc::io_error, "write failed: " + path);
}

TimeSeries read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return read_csv(in);
}

}  // namespace innervsense
