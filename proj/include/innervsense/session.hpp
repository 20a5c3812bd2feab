#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "innervsense/emulator.hpp"
#include "innervsense/events.hpp"
#include "innervsense/pad_model.hpp"
#include "innervsense/scenario.hpp"
#include "innervsense/time_series.hpp"

namespace innervsense {

inline constexpr int kSchemaVersion = 1;

struct SessionManifest {
  std::string id;
  std::string created_at;  // ISO 8601, UTC
  std::string source;      // "simulation" or "recording"
  int schema_version = kSchemaVersion;
  // Simulations
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<PadParams> pad;
  std::map<std::string, std::string> params;
  // Recordings
  std::string device_address;
  std::uint16_t device_id = kDefaultDeviceId;
  // Index of artifacts: truth channel -> unit, derived name -> relative path
  std::map<std::string, std::string> truth_units;
  std::map<std::string, std::string> derived;

  friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

// On disk:
//   manifest.json    written last, via rename
//   raw.bin          frames exactly as they crossed the wire (or were synthesized)
//   events.jsonl     one event object per line, sorted by time
//   truth/<name>.csv reference channels of simulations
//   derived/*        analysis outputs
struct Session {
  SessionManifest manifest;
  std::vector<std::uint8_t> raw;
  std::vector<Event> events;
  std::map<std::string, TimeSeries> truth;

  friend bool operator==(const Session&, const Session&) = default;
};

// Builds the stored form of a scenario run: pressure quantized through the ADC
// into data frames, events and truth copied. created_at comes from
// SOURCE_DATE_EPOCH when set, else the epoch, so reruns are byte-identical.
Session session_from_simulation(const SessionData& data);

// Throws Errc::already_exists (unless overwrite), Errc::io_error.
void write_session(const std::string& dir, const Session& session, bool overwrite = false);

// Throws Errc::already_exists when write_session(dir, ..., overwrite) would.
void check_session_target(const std::string& dir, bool overwrite);

// Throws Errc::corrupt_session, Errc::version_mismatch, Errc::io_error.
Session read_session(const std::string& dir);

// Decodes raw.bin. Damaged frames are counted in health, never fatal.
DecodedStream session_stream(const Session& session);

// Writes derived/<name> and records it in the manifest.
void add_derived(const std::string& dir, const std::string& name, const std::string& content);

// Merges events into events.jsonl of a finalized session, keeping time order.
void append_events(const std::string& dir, std::span<const Event> events);

std::string now_iso8601();
std::string iso8601_from_epoch(std::int64_t seconds);

// Incremental writer used while recording. Raw bytes and events are appended
// as they arrive; finalize() sorts events.jsonl and writes the manifest.
class SessionWriter {
 public:
  SessionWriter(std::string dir, SessionManifest manifest, bool overwrite);
  ~SessionWriter();
  SessionWriter(const SessionWriter&) = delete;
  SessionWriter& operator=(const SessionWriter&) = delete;

  void append_raw(std::span<const std::uint8_t> bytes);
  void append_event(const Event& e);
  void finalize();

  SessionManifest& manifest() noexcept { return manifest_; }
  const std::string& dir() const noexcept { return dir_; }
  std::uint64_t raw_bytes() const noexcept { return raw_bytes_; }
  std::size_t event_count() const noexcept { return events_.size(); }

 private:
  std::string dir_;
  SessionManifest manifest_;
  std::FILE* raw_ = nullptr;
  std::FILE* events_file_ = nullptr;
  std::vector<Event> events_;
  std::uint64_t raw_bytes_ = 0;
  bool finalized_ = false;
};

}  // namespace innervsense
