#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "innervsense/units.hpp"

namespace innervsense {

std::int64_t seconds_to_us(double seconds);
inline double us_to_seconds(std::int64_t us) { return static_cast<double>(us) * 1e-6; }

// Timestamped scalar channel. Times are kept in integer microseconds and
// exposed in seconds. Immutable once built.
class TimeSeries {
 public:
  TimeSeries() = default;

  // Times must be non-decreasing; repeated timestamps keep the first value.
  static TimeSeries from_us(std::vector<std::int64_t> t_us, std::vector<double> values, Unit unit,
                            std::optional<double> rate_hint = std::nullopt);
  static TimeSeries from_seconds(std::span<const double> t_s, std::span<const double> values, Unit unit,
                                 std::optional<double> rate_hint = std::nullopt);

  std::size_t size() const noexcept { return t_us_.size(); }
  bool empty() const noexcept { return t_us_.empty(); }
  Unit unit() const noexcept { return unit_; }
  std::optional<double> rate_hint() const noexcept { return rate_hint_; }

  std::span<const std::int64_t> t_us() const noexcept { return t_us_; }
  std::span<const double> values() const noexcept { return v_; }
  double t_s(std::size_t i) const { return us_to_seconds(t_us_.at(i)); }
  double value(std::size_t i) const { return v_.at(i); }
  std::vector<double> times_s() const;

  double start_s() const;
  double end_s() const;
  double duration_s() const { return end_s() - start_s(); }

  // Linear interpolation. Throws Errc::grid_out_of_range outside [start, end].
  double at_us(std::int64_t t) const;
  double at(double t_s) const { return at_us(seconds_to_us(t_s)); }

  // Samples with start <= t <= end (no interpolation at the edges).
  TimeSeries slice(double start_s, double end_s) const;
  // Index range [first, last) of samples with start <= t <= end.
  std::pair<std::size_t, std::size_t> index_range(double start_s, double end_s) const;

  TimeSeries with_values(std::vector<double> values) const;
  TimeSeries converted(Unit unit, double factor) const;
  TimeSeries shifted_in_time(double offset_s) const;

  // Compares timebase, values and unit; the rate hint is advisory and ignored.
  friend bool operator==(const TimeSeries& a, const TimeSeries& b) {
    return a.unit_ == b.unit_ && a.t_us_ == b.t_us_ && a.v_ == b.v_;
  }

 private:
  std::vector<std::int64_t> t_us_;
  std::vector<double> v_;
  Unit unit_ = Unit::dimensionless;
  std::optional<double> rate_hint_;
};

// Pointwise arithmetic on series sharing a unit and a timebase. Throws
// Errc::unit_mismatch or Errc::grid_out_of_range (timebases differ).
TimeSeries add(const TimeSeries& a, const TimeSeries& b);
TimeSeries subtract(const TimeSeries& a, const TimeSeries& b);

struct AlignedTable {
  std::vector<double> grid_s;
  std::vector<std::vector<double>> columns;  // one per input series
};

// Linear interpolation of each series at the grid times; never extrapolates.
AlignedTable merge_on_grid(std::span<const TimeSeries> series, std::span<const double> grid_s);

// Uniform grid in microseconds from start to end (inclusive when it lands).
std::vector<std::int64_t> uniform_grid_us(std::int64_t start_us, std::int64_t end_us, double rate_hz);

// Text form: header "t_s,<unit>", one row per sample. Times are written with
// microsecond precision, values with round-trip precision.
void write_csv(std::ostream& out, const TimeSeries& series);
TimeSeries read_csv(std::istream& in);
void write_csv_file(const std::string& path, const TimeSeries& series);
TimeSeries read_csv_file(const std::string& path);

}  // namespace innervsense
