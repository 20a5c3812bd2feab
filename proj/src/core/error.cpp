#include "innervsense/error.hpp"

namespace innervsense {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ok: return "Ok";
    case Errc::range_error: return "RangeError";
    case Errc::grid_out_of_range: return "GridOutOfRange";
    case Errc::unit_mismatch: return "UnitMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::unknown_scenario: return "UnknownScenario";
    case Errc::bad_params: return "BadParams";
    case Errc::invalid_frame: return "InvalidFrame";
    case Errc::crc_mismatch: return "CrcMismatch";
    case Errc::sink_closed: return "SinkClosed";
    case Errc::non_uniform_sampling: return "NonUniformSampling";
    case Errc::cutoff_out_of_range: return "CutoffOutOfRange";
    case Errc::window_out_of_range: return "WindowOutOfRange";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::empty_series: return "EmptySeries";
    case Errc::degenerate_x: return "DegenerateX";
    case Errc::flat_signal: return "FlatSignal";
    case Errc::no_decay: return "NoDecay";
    case Errc::boundary_out_of_range: return "BoundaryOutOfRange";
    case Errc::too_short_cycle: return "TooShortCycle";
    case Errc::empty_cycle_set: return "EmptyCycleSet";
    case Errc::series_too_short: return "SeriesTooShort";
    case Errc::unbalanced_design: return "UnbalancedDesign";
    case Errc::insufficient_replicates: return "InsufficientReplicates";
    case Errc::domain_error: return "DomainError";
    case Errc::unknown_factor: return "UnknownFactor";
    case Errc::io_error: return "IoError";
    case Errc::already_exists: return "AlreadyExists";
    case Errc::corrupt_session: return "CorruptSession";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::usage: return "Usage";
    case Errc::network_error: return "NetworkError";
  }
  return "Unknown";
}

}  // namespace innervsense
