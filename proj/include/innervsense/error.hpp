#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace innervsense {

// Every failure the library can report. Values are stable: the C API exposes
// them as isense_status codes.
enum class Errc : int {
  ok = 0,
  range_error,
  grid_out_of_range,
  unit_mismatch,
  length_mismatch,
  non_finite_input,
  unknown_scenario,
  bad_params,
  invalid_frame,
  crc_mismatch,
  sink_closed,
  non_uniform_sampling,
  cutoff_out_of_range,
  window_out_of_range,
  too_few_samples,
  empty_series,
  degenerate_x,
  flat_signal,
  no_decay,
  boundary_out_of_range,
  too_short_cycle,
  empty_cycle_set,
  series_too_short,
  unbalanced_design,
  insufficient_replicates,
  domain_error,
  unknown_factor,
  io_error,
  already_exists,
  corrupt_session,
  version_mismatch,
  usage,
  network_error,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace innervsense
