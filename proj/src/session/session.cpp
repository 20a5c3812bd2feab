#include "innervsense/session.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "innervsense/error.hpp"
#include "../core/json_text.hpp"

namespace innervsense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kRaw = "raw.bin";
constexpr const char* kEvents = "events.jsonl";

json pad_to_json(const PadParams& p) {
  return json{{"a", p.a},         {"b", p.b},         {"tau", p.tau},   {"r", p.r},
              {"p_sat", p.p_sat}, {"k1", p.k1},       {"k3", p.k3},     {"c_h", p.c_h},
              {"kappa_bend", p.kappa_bend}, {"noise_sigma", p.noise_sigma}};
}

PadParams pad_from_json(const json& j) {
  PadParams p;
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
  p.tau = j.at("tau").get<double>();
  p.r = j.at("r").get<double>();
  p.p_sat = j.at("p_sat").get<double>();
  p.k1 = j.at("k1").get<double>();
  p.k3 = j.at("k3").get<double>();
  p.c_h = j.at("c_h").get<double>();
  p.kappa_bend = j.at("kappa_bend").get<double>();
  p.noise_sigma = j.at("noise_sigma").get<double>();
  return p;
}

json manifest_to_json(const SessionManifest& m) {
  json j{{"schema_version", m.schema_version},
         {"id", m.id},
         {"created_at", m.created_at},
         {"source", m.source},
         {"truth", m.truth_units},
         {"derived", m.derived}};
  if (m.source == "simulation") {
    j["scenario"] = m.scenario;
    j["seed"] = m.seed;
    j["params"] = m.params;
    if (m.pad) j["pad"] = pad_to_json(*m.pad);
  } else {
    j["device"] = json{{"address", m.device_address}, {"device_id", m.device_id}};
  }
  return j;
}

SessionManifest manifest_from_json(const json& j) {
  SessionManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != kSchemaVersion) {
    throw Error(Errc::version_mismatch, "session schema version " + std::to_string(m.schema_version) +
                                            " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  m.id = j.at("id").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
  m.source = j.at("source").get<std::string>();
  m.truth_units = j.value("truth", std::map<std::string, std::string>{});
  m.derived = j.value("derived", std::map<std::string, std::string>{});
  if (m.source == "simulation") {
    m.scenario = j.at("scenario").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.params = j.value("params", std::map<std::string, std::string>{});
    if (j.contains("pad")) m.pad = pad_from_json(j.at("pad"));
  } else if (j.contains("device")) {
    m.device_address = j.at("device").value("address", "");
    m.device_id = j.at("device").value("device_id", kDefaultDeviceId);
  }
  return m;
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::corrupt_session, "missing " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes next to the target and renames over it.
void write_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "cannot finalize " + path.string() + ": " + ec.message());
}

void write_manifest(const fs::path& dir, const SessionManifest& m) {
  write_atomic(dir / kManifest, json_text(manifest_to_json(m), 2) + "\n");
}

SessionManifest load_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifest;
  if (!fs::exists(path)) throw Error(Errc::corrupt_session, "no manifest.json in " + dir.string());
  json j;
  try {
    j = json::parse(read_file(path));
    return manifest_from_json(j);
  } catch (const json::exception& e) {
    throw Error(Errc::corrupt_session, "bad manifest in " + dir.string() + ": " + e.what());
  }
}

std::string events_jsonl(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) {
    out += event_to_json(e);
    out += '\n';
  }
  return out;
}

// True when the directory holds a session that may be replaced.
bool check_target(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (!fs::exists(dir, ec)) return false;
  if (!fs::is_directory(dir)) throw Error(Errc::already_exists, dir.string() + " exists and is not a directory");
  if (fs::is_empty(dir)) return false;
  if (!overwrite) throw Error(Errc::already_exists, dir.string() + " already exists (use --overwrite)");
  if (!fs::exists(dir / kManifest) && !fs::exists(dir / kRaw)) {
    throw Error(Errc::already_exists, dir.string() + " is not a session directory; refusing to overwrite");
  }
  return true;
}

void prepare_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (check_target(dir, overwrite)) {
    fs::remove_all(dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot clear " + dir.string() + ": " + ec.message());
  }
  fs::create_directories(dir / "truth", ec);
  if (!ec) fs::create_directories(dir / "derived", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void check_session_target(const std::string& dir, bool overwrite) { check_target(dir, overwrite); }

std::string iso8601_from_epoch(std::int64_t seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  return iso8601_from_epoch(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

Session session_from_simulation(const SessionData& data) {
  Session s;
  auto& m = s.manifest;
  m.source = "simulation";
  m.scenario = std::string(scenario_name(data.kind));
  m.seed = data.seed;
  m.id = "sim-" + m.scenario + "-" + std::to_string(data.seed);
  std::int64_t epoch = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) epoch = std::strtoll(sde, nullptr, 10);
  m.created_at = iso8601_from_epoch(epoch);
  m.pad = data.pad;
  m.params = data.params;
  s.raw = encode_pressure_frames(data.pressure);
  s.events = data.events;
  sort_events(s.events);
  for (const auto& [name, series] : data.truth) {
    m.truth_units[name] = std::string(unit_name(series.unit()));
    s.truth.emplace(name, series);
  }
  return s;
}

void write_session(const std::string& dir_str, const Session& session, bool overwrite) {
  const fs::path dir(dir_str);
  prepare_dir(dir, overwrite);
  write_file(dir / kRaw, std::string_view(reinterpret_cast<const char*>(session.raw.data()), session.raw.size()));
  auto events = session.events;
  sort_events(events);
  write_file(dir / kEvents, events_jsonl(events));
  SessionManifest m = session.manifest;
  m.truth_units.clear();
  for (const auto& [name, series] : session.truth) {
    write_csv_file((dir / "truth" / (name + ".csv")).string(), series);
    m.truth_units[name] = std::string(unit_name(series.unit()));
  }
  write_manifest(dir, m);
}

Session read_session(const std::string& dir_str) {
  const fs::path dir(dir_str);
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, "no session directory " + dir.string());
  Session s;
  s.manifest = load_manifest(dir);
  const std::string raw = read_file(dir / kRaw);
  s.raw.assign(raw.begin(), raw.end());
  std::istringstream events(read_file(dir / kEvents));
  std::string line;
  while (std::getline(events, line)) {
    if (line.empty()) continue;
    s.events.push_back(event_from_json(line));
  }
  for (const auto& [name, unit] : s.manifest.truth_units) {
    const fs::path path = dir / "truth" / (name + ".csv");
    if (!fs::exists(path)) throw Error(Errc::corrupt_session, "missing truth channel " + path.string());
    s.truth.emplace(name, read_csv_file(path.string()));
  }
  return s;
}

DecodedStream session_stream(const Session& session) { return decode_stream(session.raw); }

void add_derived(const std::string& dir_str, const std::string& name, const std::string& content) {
  const fs::path dir(dir_str);
  SessionManifest m = load_manifest(dir);
  std::error_code ec;
  fs::create_directories(dir / "derived", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + (dir / "derived").string());
  write_atomic(dir / "derived" / name, content);
  m.derived[name] = "derived/" + name;
  write_manifest(dir, m);
}

void append_events(const std::string& dir_str, std::span<const Event> events) {
  const fs::path dir(dir_str);
  load_manifest(dir);
  std::vector<Event> all;
  std::istringstream in(read_file(dir / kEvents));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) all.push_back(event_from_json(line));
  }
  all.insert(all.end(), events.begin(), events.end());
  sort_events(all);
  write_atomic(dir / kEvents, events_jsonl(all));
}

SessionWriter::SessionWriter(std::string dir, SessionManifest manifest, bool overwrite)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {
  prepare_dir(dir_, overwrite);
  raw_ = std::fopen((fs::path(dir_) / kRaw).c_str(), "wb");
  events_file_ = std::fopen((fs::path(dir_) / kEvents).c_str(), "wb");
  if (!raw_ || !events_file_) throw Error(Errc::io_error, std::string("cannot open session files: ") + std::strerror(errno));
}

SessionWriter::~SessionWriter() {
  try {
    finalize();
  } catch (...) {
  }
}

void SessionWriter::append_raw(std::span<const std::uint8_t> bytes) {
  if (finalized_) throw Error(Errc::io_error, "session already finalized");
  if (std::fwrite(bytes.data(), 1, bytes.size(), raw_) != bytes.size()) throw Error(Errc::io_error, "raw write failed");
  std::fflush(raw_);
  raw_bytes_ += bytes.size();
}

void SessionWriter::append_event(const Event& e) {
  if (finalized_) throw Error(Errc::io_error, "session already finalized");
  const std::string line = event_to_json(e) + "\n";
  if (std::fwrite(line.data(), 1, line.size(), events_file_) != line.size()) throw Error(Errc::io_error, "event write failed");
  std::fflush(events_file_);
  events_.push_back(e);
}

void SessionWriter::finalize() {
  if (finalized_) return;
  finalized_ = true;
  std::fclose(raw_);
  std::fclose(events_file_);
  raw_ = nullptr;
  events_file_ = nullptr;
  sort_events(events_);
  write_atomic(fs::path(dir_) / kEvents, events_jsonl(events_));
  write_manifest(dir_, manifest_);
}

}  // namespace innervsense
