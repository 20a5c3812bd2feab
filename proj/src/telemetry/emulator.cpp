#include "innervsense/emulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "innervsense/error.hpp"

namespace innervsense {

AdcCode saturating_counts(double pascal) {
  if (std::isnan(pascal)) throw Error(Errc::non_finite_input, "pressure is NaN");
  return pascals_to_counts(std::clamp(pascal, AdcCode::kMinPascal, AdcCode::kMaxPascal));
}

double quantize_pressure(double pascal) { return counts_to_pascals(saturating_counts(pascal)); }

Pacing parse_pacing(std::string_view name) {
  if (name == "realtime") return Pacing::realtime;
  if (name == "max") return Pacing::max;
  throw Error(Errc::usage, "pacing must be 'realtime' or 'max'");
}

std::vector<std::uint8_t> encode_pressure_frames(const TimeSeries& pressure, std::uint16_t device_id) {
  std::vector<std::uint8_t> out;
  out.reserve(pressure.size() * data_frame_size(1));
  Frame f;
  f.type = MsgType::data;
  f.device_id = device_id;
  f.channels.resize(1);
  for (std::size_t i = 0; i < pressure.size(); ++i) {
    if (pressure.t_us()[i] < 0) throw Error(Errc::invalid_frame, "negative timestamp");
    f.seq = static_cast<std::uint16_t>(i);
    f.timestamp_us = static_cast<std::uint64_t>(pressure.t_us()[i]);
    f.channels[0] = saturating_counts(pressure.values()[i]).counts;
    append_frame(out, f);
  }
  return out;
}

Event event_from_frame(const Frame& f) {
  try {
    return event_from_json(f.text);
  } catch (const Error&) {
    return Event{static_cast<std::int64_t>(f.timestamp_us), "annotate", f.text, {}, {}};
  }
}

DecodedStream collect_frames(std::span<const Frame> frames) {
  DecodedStream out;
  std::vector<std::int64_t> t;
  std::vector<double> v;
  for (const auto& f : frames) {
    switch (f.type) {
      case MsgType::data:
        t.push_back(static_cast<std::int64_t>(f.timestamp_us));
        v.push_back(counts_to_pascals(AdcCode{f.channels.at(0)}));
        break;
      case MsgType::event: out.events.push_back(event_from_frame(f)); break;
      case MsgType::meta: out.meta.push_back(f.text); break;
    }
  }
  // Out-of-order timestamps (e.g. a replayed log spliced after a live one)
  // are dropped rather than reordered.
  std::vector<std::int64_t> tt;
  std::vector<double> vv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!tt.empty() && t[i] <= tt.back()) continue;
    tt.push_back(t[i]);
    vv.push_back(v[i]);
  }
  out.pressure = TimeSeries::from_us(std::move(tt), std::move(vv), Unit::pascal, 50.0);
  sort_events(out.events);
  return out;
}

DecodedStream decode_stream(std::span<const std::uint8_t> bytes) {
  StreamHealth health;
  const auto frames = decode_all(bytes, &health);
  DecodedStream out = collect_frames(frames);
  out.health = health;
  return out;
}

EmulationReport emulate_device(const DeviceStream& stream, Pacing pacing, ByteSink& sink) {
  using clock = std::chrono::steady_clock;
  EmulationReport report;
  const auto started = clock::now();
  std::uint16_t seq = 0;
  std::vector<std::uint8_t> buf;

  auto send = [&](const Frame& f) {
    buf.clear();
    append_frame(buf, f);
    if (!sink.write(buf)) return false;
    report.bytes += buf.size();
    return true;
  };
  auto finish = [&](bool completed) {
    report.completed = completed;
    report.wall_seconds = std::chrono::duration<double>(clock::now() - started).count();
    return report;
  };

  const std::int64_t t0 = stream.pressure.empty() ? 0 : stream.pressure.t_us()[0];
  auto pace = [&](std::int64_t t_us) {
    if (pacing == Pacing::realtime) std::this_thread::sleep_until(started + std::chrono::microseconds(t_us - t0));
  };

  if (!stream.meta.empty()) {
    Frame meta{MsgType::meta, stream.device_id, seq++, static_cast<std::uint64_t>(std::max<std::int64_t>(t0, 0)), {}, stream.meta};
    if (!send(meta)) return finish(false);
    ++report.meta_frames;
  }

  std::vector<Event> events = stream.events;
  sort_events(events);
  std::size_t next_event = 0;
  auto send_event = [&](const Event& e) {
    Frame f{MsgType::event, stream.device_id, seq++, static_cast<std::uint64_t>(std::max<std::int64_t>(e.t_us, 0)), {}, event_to_json(e)};
    if (!send(f)) return false;
    ++report.event_frames;
    return true;
  };

  Frame data;
  data.type = MsgType::data;
  data.device_id = stream.device_id;
  data.channels.resize(1);
  for (std::size_t i = 0; i < stream.pressure.size(); ++i) {
    const std::int64_t t = stream.pressure.t_us()[i];
    pace(t);
    while (next_event < events.size() && events[next_event].t_us <= t) {
      if (!send_event(events[next_event++])) return finish(false);
    }
    data.seq = seq++;
    data.timestamp_us = static_cast<std::uint64_t>(std::max<std::int64_t>(t, 0));
    data.channels[0] = saturating_counts(stream.pressure.values()[i]).counts;
    if (!send(data)) return finish(false);
    ++report.data_frames;
  }
  while (next_event < events.size()) {
    pace(events[next_event].t_us);
    if (!send_event(events[next_event++])) return finish(false);
  }
  return finish(true);
}

}  // namespace innervsense
