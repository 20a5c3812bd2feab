#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "innervsense/emulator.hpp"
#include "innervsense/frame.hpp"

namespace innervsense {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string str() const { return host + ":" + std::to_string(port); }
};

// "host:port", ":port" or "port". Throws Errc::usage.
Endpoint parse_endpoint(std::string_view text);

// Listens on `listen`, serves the stream to the first client that connects
// and closes. `on_listening` receives the bound port (useful with port 0).
EmulationReport serve_device(const DeviceStream& stream, Pacing pacing, const Endpoint& listen,
                             const std::function<void(std::uint16_t)>& on_listening = {});

struct RecordOptions {
  Endpoint device;
  std::string out_dir;
  bool overwrite = false;
  double connect_timeout_s = 10.0;
};

struct RecordReport {
  StreamHealth health;
  std::uint64_t bytes = 0;
  std::uint64_t events = 0;
};

// Connects (retrying until the timeout), spools every received byte to
// raw.bin, stores event frames in events.jsonl and finalizes the session at
// end of stream. Host arrival times go to derived/arrival.csv.
RecordReport record_session(const RecordOptions& opts);

struct HostOptions {
  // Exactly one source: a device address to connect to, or a session directory to replay.
  std::optional<Endpoint> device;
  std::string session_dir;
  Pacing replay_pacing = Pacing::realtime;
  bool loop_replay = false;

  Endpoint ui{"127.0.0.1", 8080};
  std::optional<Endpoint> ingest;  // raw frame ingest port
  std::string ui_dir;              // static assets; a built-in page when empty
  std::string out_dir;             // session written for live sources
  bool overwrite = false;
  std::size_t subscriber_queue = 1024;
  double health_interval_s = 1.0;
};

// Dashboard host: raw frame ingest, a WebSocket message stream at /stream,
// a control channel at /control (WebSocket or HTTP POST) and static files.
//
// Stream messages: {"type":"sample","t_s","pa","seq","device_id"},
// {"type":"event","t_s","event","label",...}, {"type":"health","t_s",...}.
// Control messages: {"type":"annotate"|"trial_start"|"trial_stop","label",
// ...numeric or string attributes}; each is timestamped with the newest
// device time, persisted and acknowledged with {"type":"ack","ok",...}.
class HostService {
 public:
  explicit HostService(HostOptions opts);
  ~HostService();
  HostService(const HostService&) = delete;
  HostService& operator=(const HostService&) = delete;

  void start();
  void stop();
  // Blocks until stop() or until a finite source is exhausted (replay without loop).
  void wait();

  std::uint16_t ui_port() const;
  std::optional<std::uint16_t> ingest_port() const;
  StreamHealth health() const;
  std::uint64_t samples_published() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace innervsense
