#include "innervsense/net.hpp"

#include <sys/socket.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <list>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "innervsense/error.hpp"
#include "innervsense/publisher.hpp"
#include "innervsense/session.hpp"
#include "../core/json_text.hpp"

namespace innervsense {

namespace detail {
extern const std::string_view kBuiltinPage;
}

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  std::string_view port_text = text;
  const auto colon = text.rfind(':');
  if (colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  unsigned port = 0;
  const auto res = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || res.ec != std::errc{} || res.ptr != port_text.data() + port_text.size() || port > 65535) {
    throw Error(Errc::usage, "bad address '" + std::string(text) + "' (expected host:port)");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

namespace {

tcp::endpoint resolve(asio::io_context& io, const Endpoint& ep) {
  boost::system::error_code ec;
  tcp::resolver resolver(io);
  const auto results = resolver.resolve(ep.host, std::to_string(ep.port), ec);
  if (ec || results.empty()) throw Error(Errc::network_error, "cannot resolve " + ep.str() + ": " + ec.message());
  return *results.begin();
}

tcp::acceptor make_acceptor(asio::io_context& io, const Endpoint& ep) {
  const tcp::endpoint where = resolve(io, ep);
  tcp::acceptor acc(io);
  boost::system::error_code ec;
  acc.open(where.protocol(), ec);
  if (!ec) acc.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) acc.bind(where, ec);
  if (!ec) acc.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::network_error, "cannot listen on " + ep.str() + ": " + ec.message());
  return acc;
}

// Retries until connected, the deadline passes or `stop` is raised.
void connect_with_retry(tcp::socket& sock, asio::io_context& io, const Endpoint& ep, double timeout_s,
                        const std::atomic<bool>* stop = nullptr) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s));
  const tcp::endpoint where = resolve(io, ep);
  boost::system::error_code ec;
  while (true) {
    sock.connect(where, ec);
    if (!ec) {
      sock.set_option(tcp::no_delay(true), ec);
      return;
    }
    sock.close();
    if ((stop && stop->load()) || Clock::now() >= deadline) {
      throw Error(Errc::network_error, "cannot connect to " + ep.str() + ": " + ec.message());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

std::string compact_time() {
  std::string iso = now_iso8601();
  std::erase_if(iso, [](char c) { return c == '-' || c == ':'; });
  return iso;
}

}  // namespace

EmulationReport serve_device(const DeviceStream& stream, Pacing pacing, const Endpoint& listen,
                             const std::function<void(std::uint16_t)>& on_listening) {
  asio::io_context io;
  tcp::acceptor acc = make_acceptor(io, listen);
  const auto port = acc.local_endpoint().port();
  spdlog::info("device emulator listening on {}:{}", listen.host, port);
  if (on_listening) on_listening(port);
  tcp::socket sock(io);
  boost::system::error_code ec;
  acc.accept(sock, ec);
  if (ec) throw Error(Errc::network_error, "accept failed: " + ec.message());
  sock.set_option(tcp::no_delay(true), ec);
  spdlog::info("client connected from {}", sock.remote_endpoint(ec).address().to_string());
  CallbackSink sink([&](std::span<const std::uint8_t> bytes) {
    boost::system::error_code wec;
    asio::write(sock, asio::buffer(bytes.data(), bytes.size()), wec);
    return !wec;
  });
  const EmulationReport report = emulate_device(stream, pacing, sink);
  sock.shutdown(tcp::socket::shutdown_both, ec);
  sock.close(ec);
  return report;
}

RecordReport record_session(const RecordOptions& opts) {
  if (opts.out_dir.empty()) throw Error(Errc::usage, "record needs an output directory");
  check_session_target(opts.out_dir, opts.overwrite);
  asio::io_context io;
  tcp::socket sock(io);
  connect_with_retry(sock, io, opts.device, opts.connect_timeout_s);
  spdlog::info("recording from {}", opts.device.str());

  SessionManifest m;
  m.source = "recording";
  m.created_at = now_iso8601();
  m.id = "rec-" + compact_time();
  m.device_address = opts.device.str();
  SessionWriter writer(opts.out_dir, m, opts.overwrite);

  FrameDecoder decoder;
  std::vector<Frame> frames;
  std::ostringstream arrival;
  arrival.precision(17);
  arrival << "seq,t_s,host_s\n";
  const auto started = Clock::now();
  bool device_seen = false;
  RecordReport report;
  auto take = [&](double host_s) {
    for (const auto& f : frames) {
      if (!device_seen) {
        writer.manifest().device_id = f.device_id;
        device_seen = true;
      }
      if (f.type == MsgType::data) {
        arrival << f.seq << ',' << static_cast<double>(f.timestamp_us) * 1e-6 << ',' << host_s << '\n';
      } else if (f.type == MsgType::event) {
        writer.append_event(event_from_frame(f));
        ++report.events;
      }
    }
  };
  std::vector<std::uint8_t> buf(1 << 16);
  while (true) {
    boost::system::error_code ec;
    const std::size_t n = sock.read_some(asio::buffer(buf), ec);
    if (n > 0) {
      const std::span<const std::uint8_t> bytes(buf.data(), n);
      writer.append_raw(bytes);
      report.bytes += n;
      frames.clear();
      decoder.feed(bytes, frames);
      take(std::chrono::duration<double>(Clock::now() - started).count());
    }
    if (ec == asio::error::eof) break;
    if (ec) throw Error(Errc::network_error, "receive failed: " + ec.message());
  }
  frames.clear();
  decoder.finish(frames);
  take(std::chrono::duration<double>(Clock::now() - started).count());
  report.health = decoder.health();
  writer.finalize();
  add_derived(opts.out_dir, "arrival.csv", arrival.str());
  return report;
}

// --- host service -------------------------------------------------------------

struct HostService::Impl {
  explicit Impl(HostOptions o) : opts(std::move(o)) {}

  HostOptions opts;
  asio::io_context io;
  std::optional<tcp::acceptor> ui_acc;
  std::optional<tcp::acceptor> ingest_acc;
  Publisher<std::string> pub;

  std::atomic<bool> stopping{false};
  std::atomic<std::int64_t> latest_t_us{0};
  std::atomic<std::uint64_t> samples{0};

  std::mutex mu;  // guards the members below
  std::condition_variable cv;
  bool source_done = false;
  std::int64_t last_control_t_us = -1;
  std::unique_ptr<SessionWriter> writer;
  std::shared_ptr<FrameDecoder> current_decoder;
  StreamHealth replay_health;
  std::set<std::shared_ptr<tcp::socket>> sockets;

  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;

  void spawn(std::function<void()> fn) {
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu);
    for (auto it = workers.begin(); it != workers.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = workers.erase(it);
      } else {
        ++it;
      }
    }
    workers.push_back(Worker{std::thread([fn = std::move(fn), done] {
                               try {
                                 fn();
                               } catch (const std::exception& e) {
                                 spdlog::warn("{}", e.what());
                               }
                               done->store(true);
                             }),
                             done});
  }

  std::shared_ptr<tcp::socket> track(tcp::socket s) {
    auto p = std::make_shared<tcp::socket>(std::move(s));
    std::lock_guard lock(mu);
    sockets.insert(p);
    return p;
  }
  void untrack(const std::shared_ptr<tcp::socket>& s) {
    std::lock_guard lock(mu);
    sockets.erase(s);
  }

  void mark_source_done() {
    {
      std::lock_guard lock(mu);
      source_done = true;
    }
    cv.notify_all();
  }

  // --- publishing ---

  void publish_frame(const Frame& f) {
    if (f.type == MsgType::data) {
      const auto t = static_cast<std::int64_t>(f.timestamp_us);
      std::int64_t prev = latest_t_us.load();
      while (t > prev && !latest_t_us.compare_exchange_weak(prev, t)) {
      }
      json msg{{"type", "sample"},
               {"t_s", static_cast<double>(t) * 1e-6},
               {"pa", f.channels.empty() ? 0.0 : counts_to_pascals(AdcCode{f.channels[0]})},
               {"seq", f.seq},
               {"device_id", f.device_id}};
      pub.publish(json_text(msg));
      ++samples;
    } else if (f.type == MsgType::event) {
      publish_event(event_from_frame(f));
    }
  }

  void publish_event(const Event& e) {
    json msg = json::parse(event_to_json(e));
    msg["event"] = msg["type"];
    msg["type"] = "event";
    pub.publish(json_text(msg));
  }

  StreamHealth health() {
    std::lock_guard lock(mu);
    return current_decoder ? current_decoder->health() : replay_health;
  }

  void publish_health() {
    const StreamHealth h = health();
    json msg{{"type", "health"},
             {"t_s", static_cast<double>(latest_t_us.load()) * 1e-6},
             {"frames_ok", h.frames_ok},
             {"frames_crc_fail", h.frames_crc_fail},
             {"frames_resync", h.frames_resync},
             {"gaps", h.gaps},
             {"last_seq", h.last_seq},
             {"subscribers", pub.subscriber_count()}};
    pub.publish(json_text(msg));
  }

  // --- sources ---

  void ingest_socket(const std::shared_ptr<tcp::socket>& sock) {
    auto decoder = std::make_shared<FrameDecoder>();
    {
      std::lock_guard lock(mu);
      current_decoder = decoder;
    }
    std::vector<std::uint8_t> buf(1 << 16);
    std::vector<Frame> frames;
    auto take = [&] {
      {
        std::lock_guard lock(mu);
        if (writer) {
          for (const auto& f : frames) {
            if (f.type == MsgType::event) writer->append_event(event_from_frame(f));
          }
        }
      }
      for (const auto& f : frames) publish_frame(f);
    };
    while (!stopping) {
      boost::system::error_code ec;
      const std::size_t n = sock->read_some(asio::buffer(buf), ec);
      if (n > 0) {
        const std::span<const std::uint8_t> bytes(buf.data(), n);
        frames.clear();
        decoder->feed(bytes, frames);
        {
          std::lock_guard lock(mu);
          if (writer) writer->append_raw(bytes);
        }
        take();
      }
      if (ec) break;
    }
    frames.clear();
    decoder->finish(frames);
    take();
  }

  void run_device_source() {
    tcp::socket s(io);
    connect_with_retry(s, io, *opts.device, 1e9, &stopping);
    spdlog::info("connected to device {}", opts.device->str());
    auto sock = track(std::move(s));
    ingest_socket(sock);
    untrack(sock);
    mark_source_done();
  }

  void run_replay_source() {
    const Session session = read_session(opts.session_dir);
    StreamHealth h;
    const std::vector<Frame> frames = decode_all(session.raw, &h);
    {
      std::lock_guard lock(mu);
      replay_health = h;
    }
    std::int64_t offset = 0;
    do {
      if (frames.empty()) break;
      const auto t0 = static_cast<std::int64_t>(frames.front().timestamp_us);
      const auto started = Clock::now();
      std::int64_t last = t0;
      for (Frame f : frames) {
        if (stopping) break;
        const auto t = static_cast<std::int64_t>(f.timestamp_us);
        if (opts.replay_pacing == Pacing::realtime) {
          std::unique_lock lock(mu);
          cv.wait_until(lock, started + std::chrono::microseconds(t - t0), [&] { return stopping.load(); });
        }
        f.timestamp_us = static_cast<std::uint64_t>(t + offset);
        publish_frame(f);
        last = t;
      }
      offset += last - t0 + 20000;
    } while (opts.loop_replay && !stopping);
    mark_source_done();
  }

  // --- control channel ---

  json handle_control(std::string_view text) {
    json req;
    try {
      req = json::parse(text);
    } catch (const json::exception&) {
      return json{{"type", "ack"}, {"ok", false}, {"error", "control message is not JSON"}};
    }
    static const std::set<std::string> kTypes{"annotate", "trial_start", "trial_stop"};
    if (!req.is_object() || !req.contains("type") || !req["type"].is_string() ||
        !kTypes.count(req["type"].get<std::string>())) {
      return json{{"type", "ack"}, {"ok", false}, {"error", "type must be annotate, trial_start or trial_stop"}};
    }
    if (req.contains("label") && !req["label"].is_string()) {
      return json{{"type", "ack"}, {"ok", false}, {"error", "label must be a string"}};
    }
    Event e;
    e.type = req["type"].get<std::string>();
    e.label = req.value("label", "");
    for (const auto& [k, v] : req.items()) {
      if (k == "type" || k == "label" || k == "t_s") continue;
      if (v.is_number()) {
        e.values[k] = v.get<double>();
      } else if (v.is_string()) {
        e.tags[k] = v.get<std::string>();
      } else if (v.is_boolean()) {
        e.tags[k] = v.get<bool>() ? "true" : "false";
      }
    }
    {
      std::lock_guard lock(mu);
      // Newest device time, nudged so control events stay strictly ordered.
      e.t_us = std::max(latest_t_us.load(), last_control_t_us + 1);
      last_control_t_us = e.t_us;
      try {
        if (writer) {
          writer->append_event(e);
        } else if (!opts.session_dir.empty()) {
          append_events(opts.session_dir, std::span<const Event>(&e, 1));
        }
      } catch (const Error& err) {
        return json{{"type", "ack"}, {"ok", false}, {"error", err.what()}};
      }
    }
    publish_event(e);
    return json{{"type", "ack"}, {"ok", true}, {"event", json::parse(event_to_json(e))}};
  }

  // --- HTTP / WebSocket ---

  static std::string_view mime_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    return "application/octet-stream";
  }

  http::response<http::string_body> respond(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    res.set(http::field::server, "innervsense");
    auto reply = [&](http::status st, std::string_view type, std::string body) {
      res.result(st);
      res.set(http::field::content_type, std::string(type));
      res.body() = std::move(body);
      res.prepare_payload();
      return res;
    };
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));
    if (path == "/control") {
      if (req.method() != http::verb::post) return reply(http::status::method_not_allowed, "text/plain", "POST only\n");
      const json ack = handle_control(req.body());
      return reply(ack["ok"].get<bool>() ? http::status::ok : http::status::bad_request, "application/json",
                   json_text(ack));
    }
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
      return reply(http::status::method_not_allowed, "text/plain", "method not allowed\n");
    }
    if (path == "/health") {
      const StreamHealth h = health();
      json body{{"frames_ok", h.frames_ok},   {"frames_crc_fail", h.frames_crc_fail},
                {"frames_resync", h.frames_resync}, {"gaps", h.gaps},
                {"samples", samples.load()}, {"subscribers", pub.subscriber_count()},
                {"t_s", static_cast<double>(latest_t_us.load()) * 1e-6}};
      return reply(http::status::ok, "application/json", json_text(body));
    }
    const std::string rel = path == "/" ? "index.html" : path.substr(1);
    if (opts.ui_dir.empty()) {
      if (rel == "index.html") return reply(http::status::ok, "text/html; charset=utf-8", std::string(detail::kBuiltinPage));
      return reply(http::status::not_found, "text/plain", "not found\n");
    }
    namespace fs = std::filesystem;
    const fs::path root = fs::weakly_canonical(opts.ui_dir);
    const fs::path file = fs::weakly_canonical(root / rel);
    const auto [root_end, file_it] = std::mismatch(root.begin(), root.end(), file.begin(), file.end());
    if (root_end != root.end() || !fs::is_regular_file(file)) {
      return reply(http::status::not_found, "text/plain", "not found\n");
    }
    std::ifstream in(file, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return reply(http::status::ok, mime_type(file), body.str());
  }

  void serve_stream(const std::shared_ptr<tcp::socket>& sock, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(*sock);
    ws.accept(req);
    ws.text(true);
    auto sub = pub.subscribe(opts.subscriber_queue);
    boost::system::error_code ec;
    while (!stopping) {
      auto msg = sub->pop_for(std::chrono::milliseconds(200));
      if (!msg) {
        if (sub->closed()) break;
        continue;
      }
      ws.write(asio::buffer(*msg), ec);
      if (ec) break;
    }
    sub->close();
    if (!ec) ws.close(websocket::close_code::going_away, ec);
  }

  void serve_control(const std::shared_ptr<tcp::socket>& sock, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(*sock);
    ws.accept(req);
    ws.text(true);
    while (!stopping) {
      beast::flat_buffer buf;
      boost::system::error_code ec;
      ws.read(buf, ec);
      if (ec) break;
      const json ack = handle_control(beast::buffers_to_string(buf.data()));
      ws.write(asio::buffer(json_text(ack)), ec);
      if (ec) break;
    }
  }

  void serve_connection(const std::shared_ptr<tcp::socket>& sock) {
    beast::flat_buffer buf;
    while (!stopping) {
      http::request<http::string_body> req;
      boost::system::error_code ec;
      http::read(*sock, buf, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        if (req.target() == "/stream") {
          serve_stream(sock, req);
        } else if (req.target() == "/control") {
          serve_control(sock, req);
        } else {
          http::response<http::string_body> res{http::status::not_found, req.version()};
          res.body() = "no such socket\n";
          res.prepare_payload();
          http::write(*sock, res, ec);
        }
        break;
      }
      auto res = respond(req);
      http::write(*sock, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    boost::system::error_code ec;
    sock->shutdown(tcp::socket::shutdown_both, ec);
  }

  void accept_loop(tcp::acceptor& acc, bool ingest) {
    while (!stopping) {
      tcp::socket s(io);
      boost::system::error_code ec;
      acc.accept(s, ec);
      if (ec || stopping) break;
      s.set_option(tcp::no_delay(true), ec);
      auto sock = track(std::move(s));
      spawn([this, sock, ingest] {
        if (ingest) {
          ingest_socket(sock);
        } else {
          serve_connection(sock);
        }
        untrack(sock);
      });
    }
  }
};

HostService::HostService(HostOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {
  const auto& o = impl_->opts;
  if (o.device.has_value() == !o.session_dir.empty()) {
    throw Error(Errc::usage, "serve needs exactly one source: a device address or a session directory");
  }
}

HostService::~HostService() { stop(); }

void HostService::start() {
  auto& d = *impl_;
  d.ui_acc.emplace(make_acceptor(d.io, d.opts.ui));
  if (d.opts.ingest) d.ingest_acc.emplace(make_acceptor(d.io, *d.opts.ingest));
  const bool live = d.opts.device.has_value() || d.opts.ingest.has_value();
  if (live && d.opts.session_dir.empty()) {
    SessionManifest m;
    m.source = "recording";
    m.created_at = now_iso8601();
    m.id = "rec-" + compact_time();
    m.device_address = d.opts.device ? d.opts.device->str() : "ingest:" + std::to_string(*ingest_port());
    const std::string dir = d.opts.out_dir.empty() ? "serve-" + compact_time() : d.opts.out_dir;
    d.writer = std::make_unique<SessionWriter>(dir, m, d.opts.overwrite);
    spdlog::info("persisting to {}", dir);
  }
  spdlog::info("dashboard on http://{}:{}/", d.opts.ui.host, ui_port());

  d.spawn([&d] { d.accept_loop(*d.ui_acc, false); });
  if (d.ingest_acc) d.spawn([&d] { d.accept_loop(*d.ingest_acc, true); });
  if (d.opts.device) {
    d.spawn([&d] { d.run_device_source(); });
  } else {
    d.spawn([&d] { d.run_replay_source(); });
  }
  d.spawn([&d] {
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(d.opts.health_interval_s));
    std::unique_lock lock(d.mu);
    while (!d.cv.wait_for(lock, period, [&] { return d.stopping.load(); })) {
      lock.unlock();
      d.publish_health();
      lock.lock();
    }
  });
}

void HostService::stop() {
  auto& d = *impl_;
  if (d.stopping.exchange(true)) return;
  d.cv.notify_all();
  {
    std::lock_guard lock(d.mu);
    for (auto* acc : {&d.ui_acc, &d.ingest_acc}) {
      if (*acc) ::shutdown((*acc)->native_handle(), SHUT_RDWR);
    }
    for (const auto& s : d.sockets) ::shutdown(s->native_handle(), SHUT_RDWR);
  }
  d.pub.close_all();
  std::list<Impl::Worker> workers;
  {
    std::lock_guard lock(d.mu);
    workers.swap(d.workers);
  }
  for (auto& w : workers) w.thread.join();
  std::lock_guard lock(d.mu);
  if (d.writer) {
    d.writer->finalize();
    d.writer.reset();
  }
}

void HostService::wait() {
  auto& d = *impl_;
  std::unique_lock lock(d.mu);
  d.cv.wait(lock, [&] { return d.stopping.load() || d.source_done; });
}

std::uint16_t HostService::ui_port() const { return impl_->ui_acc ? impl_->ui_acc->local_endpoint().port() : 0; }

std::optional<std::uint16_t> HostService::ingest_port() const {
  if (!impl_->ingest_acc) return std::nullopt;
  return impl_->ingest_acc->local_endpoint().port();
}

StreamHealth HostService::health() const { return impl_->health(); }

std::uint64_t HostService::samples_published() const { return impl_->samples.load(); }

}  // namespace innervsense
