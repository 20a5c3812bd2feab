#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "innervsense/events.hpp"
#include "innervsense/frame.hpp"
#include "innervsense/time_series.hpp"

namespace innervsense {

inline constexpr std::uint16_t kDefaultDeviceId = 1;

// ADC code for a pressure, clipped to the representable range.
AdcCode saturating_counts(double pascal);
// Pressure after a trip through the ADC.
double quantize_pressure(double pascal);

// What a device replays: a 50 Hz pressure series, the annotations to
// interleave, and an optional meta text sent once up front.
struct DeviceStream {
  TimeSeries pressure;
  std::vector<Event> events;
  std::string meta;
  std::uint16_t device_id = kDefaultDeviceId;
};

// Data frames only, one per sample, seq = sample index mod 65536.
std::vector<std::uint8_t> encode_pressure_frames(const TimeSeries& pressure, std::uint16_t device_id = kDefaultDeviceId);

// Host-side view of a decoded byte stream.
struct DecodedStream {
  TimeSeries pressure;             // channel 0 of every data frame, in Pa
  std::vector<Event> events;       // from event frames
  std::vector<std::string> meta;   // text of meta frames
  StreamHealth health;
};

DecodedStream decode_stream(std::span<const std::uint8_t> bytes);
// Event carried by an event frame; text that is not an event object becomes
// an "annotate" event at the frame timestamp.
Event event_from_frame(const Frame& f);

// Folds already-decoded frames into a DecodedStream (health left empty).
DecodedStream collect_frames(std::span<const Frame> frames);

class ByteSink {
 public:
  virtual ~ByteSink() = default;
  // Returns false once the sink is closed.
  virtual bool write(std::span<const std::uint8_t> bytes) = 0;
};

class VectorSink final : public ByteSink {
 public:
  bool write(std::span<const std::uint8_t> bytes) override {
    data.insert(data.end(), bytes.begin(), bytes.end());
    return true;
  }
  std::vector<std::uint8_t> data;
};

class CallbackSink final : public ByteSink {
 public:
  explicit CallbackSink(std::function<bool(std::span<const std::uint8_t>)> fn) : fn_(std::move(fn)) {}
  bool write(std::span<const std::uint8_t> bytes) override { return fn_(bytes); }

 private:
  std::function<bool(std::span<const std::uint8_t>)> fn_;
};

enum class Pacing { realtime, max };
Pacing parse_pacing(std::string_view name);

struct EmulationReport {
  std::uint64_t data_frames = 0;
  std::uint64_t event_frames = 0;
  std::uint64_t meta_frames = 0;
  std::uint64_t bytes = 0;
  double wall_seconds = 0.0;
  bool completed = false;  // false when the sink closed early (SinkClosed)
};

// Streams one data frame per sample, with event frames interleaved in
// timestamp order (an event goes out before a sample with the same
// timestamp). Realtime pacing schedules each frame at its device timestamp
// relative to the first sample.
EmulationReport emulate_device(const DeviceStream& stream, Pacing pacing, ByteSink& sink);

}  // namespace innervsense
