#include "innervsense/innervsense.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "innervsense/config.hpp"
#include "innervsense/error.hpp"
#include "innervsense/frame.hpp"
#include "innervsense/net.hpp"
#include "innervsense/pipeline.hpp"
#include "innervsense/scenario.hpp"
#include "innervsense/session.hpp"
#include "../core/json_text.hpp"

using namespace innervsense;
using nlohmann::json;

static_assert(static_cast<int>(ISENSE_RANGE_ERROR) == static_cast<int>(Errc::range_error));
static_assert(static_cast<int>(ISENSE_BAD_PARAMS) == static_cast<int>(Errc::bad_params));
static_assert(static_cast<int>(ISENSE_IO_ERROR) == static_cast<int>(Errc::io_error));
static_assert(static_cast<int>(ISENSE_NETWORK_ERROR) == static_cast<int>(Errc::network_error));

struct isense_config {
  KeyValueConfig cfg;
};

struct isense_session {
  Session session;
};

struct isense_host {
  std::unique_ptr<HostService> service;
};

namespace {

thread_local std::string g_last_error;

// Diagnostics go to standard error so JSON on standard output stays clean.
const bool g_logger_ready = [] {
  auto logger = std::make_shared<spdlog::logger>("innervsense", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  return true;
}();

template <class F>
isense_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ISENSE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<isense_status>(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISENSE_INTERNAL;
  }
}

isense_status invalid(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return ISENSE_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

AnalysisOptions to_options(const isense_analysis_options* o) {
  AnalysisOptions a;
  if (!o) return a;
  a.cutoff_hz = o->cutoff_hz;
  a.rest_window = {o->rest_start_s, o->rest_end_s};
  a.steady_window_s = o->steady_window_s;
  a.posthoc = o->posthoc == ISENSE_POSTHOC_TUKEY_HSD ? PosthocMethod::tukey_hsd : PosthocMethod::fisher_lsd;
  a.alpha = o->alpha;
  return a;
}

std::string anova_output(const FactorialTable& table, const AnalysisOptions& opts, int as_text) {
  const AnovaReport report = anova_report(table, opts);
  return as_text ? anova_text(table, report) : json_text(to_json(table, report), 2);
}

}  // namespace

extern "C" {

const char* isense_version(void) { return "1.0.0"; }

const char* isense_status_name(isense_status status) {
  if (status == ISENSE_INVALID_ARGUMENT) return "InvalidArgument";
  if (status == ISENSE_INTERNAL) return "Internal";
  if (status < ISENSE_OK || status > ISENSE_NETWORK_ERROR) return "Unknown";
  return errc_name(static_cast<Errc>(status)).data();
}

const char* isense_last_error(void) { return g_last_error.c_str(); }

isense_status isense_set_log_level(const char* level) {
  if (!level) return invalid("level");
  const auto lvl = spdlog::level::from_str(level);
  if (lvl == spdlog::level::off && std::strcmp(level, "off") != 0) {
    g_last_error = std::string("Usage: unknown log level '") + level + "'";
    return ISENSE_USAGE;
  }
  spdlog::set_level(lvl);
  return ISENSE_OK;
}

void isense_free_string(char* s) { std::free(s); }

uint16_t isense_crc16(const uint8_t* bytes, size_t len) {
  if (!bytes) return crc16_ccitt_false({});
  return crc16_ccitt_false(std::span<const std::uint8_t>(bytes, len));
}

isense_status isense_scenario_names(char** out_json) {
  if (!out_json) return invalid("out_json");
  return guarded([&] {
    json names = json::array();
    for (auto n : scenario_names()) names.push_back(std::string(n));
    *out_json = dup_string(json_text(names));
  });
}

isense_status isense_config_create(isense_config** out) {
  if (!out) return invalid("out");
  return guarded([&] { *out = new isense_config{}; });
}

void isense_config_destroy(isense_config* cfg) { delete cfg; }

isense_status isense_config_load(isense_config* cfg, const char* path) {
  if (!cfg || !path) return invalid("cfg/path");
  return guarded([&] {
    const KeyValueConfig loaded = KeyValueConfig::load(path);
    for (const auto& [k, v] : loaded.entries()) cfg->cfg.set(k, v);
  });
}

isense_status isense_config_set(isense_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid("cfg/key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

isense_status isense_simulate(const char* scenario, const isense_config* cfg, uint64_t seed, isense_session** out) {
  if (!scenario || !out) return invalid("scenario/out");
  return guarded([&] {
    const KeyValueConfig empty;
    const SessionData data = run_scenario(parse_scenario(scenario), cfg ? cfg->cfg : empty, seed);
    *out = new isense_session{session_from_simulation(data)};
  });
}

isense_status isense_session_read(const char* dir, isense_session** out) {
  if (!dir || !out) return invalid("dir/out");
  return guarded([&] { *out = new isense_session{read_session(dir)}; });
}

isense_status isense_session_write(const isense_session* s, const char* dir, int overwrite) {
  if (!s || !dir) return invalid("session/dir");
  return guarded([&] { write_session(dir, s->session, overwrite != 0); });
}

void isense_session_destroy(isense_session* s) { delete s; }

isense_status isense_session_info(const isense_session* s, char** out_json) {
  if (!s || !out_json) return invalid("session/out_json");
  return guarded([&] {
    StreamHealth h;
    const TimeSeries p = session_pressure(s->session, &h);
    const auto& m = s->session.manifest;
    json j{{"id", m.id},
           {"source", m.source},
           {"created_at", m.created_at},
           {"schema_version", m.schema_version},
           {"samples", p.size()},
           {"duration_s", p.empty() ? 0.0 : p.duration_s()},
           {"events", s->session.events.size()},
           {"raw_bytes", s->session.raw.size()},
           {"truth", m.truth_units},
           {"health", to_json(h)}};
    if (!m.scenario.empty()) {
      j["scenario"] = m.scenario;
      j["seed"] = m.seed;
    }
    *out_json = dup_string(json_text(j, 2));
  });
}

isense_analysis_options isense_analysis_options_default(void) {
  const AnalysisOptions a;
  return isense_analysis_options{a.cutoff_hz,       a.rest_window.first, a.rest_window.second,
                                 a.steady_window_s, ISENSE_POSTHOC_FISHER_LSD, a.alpha};
}

isense_status isense_analyze(const char* session_dir, const char* analysis, const isense_analysis_options* opts,
                             char** out_json) {
  if (!session_dir || !analysis || !out_json) return invalid("session_dir/analysis/out_json");
  return guarded([&] {
    const Session s = read_session(session_dir);
    const AnalysisOptions o = to_options(opts);
    const std::string_view what(analysis);
    json result;
    if (what == "calibrate") {
      result = analyze_calibrate(s);
    } else if (what == "relax") {
      result = analyze_relax(s);
    } else if (what == "condition") {
      result = analyze_condition(s, o);
    } else if (what == "cycles") {
      result = analyze_cycles(s, o, session_dir);
    } else if (what == "steady") {
      result = analyze_steady(s, o, session_dir);
    } else {
      throw Error(Errc::usage, "unknown analysis '" + std::string(what) + "'");
    }
    *out_json = dup_string(json_text(result, 2));
  });
}

isense_status isense_anova_table(const char* table_csv, const isense_analysis_options* opts, int as_text, char** out) {
  if (!table_csv || !out) return invalid("table_csv/out");
  return guarded([&] { *out = dup_string(anova_output(read_table_csv_file(table_csv), to_options(opts), as_text)); });
}

isense_status isense_anova_session(const char* session_dir, const isense_analysis_options* opts, int as_text,
                                   char** out) {
  if (!session_dir || !out) return invalid("session_dir/out");
  return guarded([&] {
    const AnalysisOptions o = to_options(opts);
    const FactorialTable table = steady_table(steady_entries(read_session(session_dir), o));
    *out = dup_string(anova_output(table, o, as_text));
  });
}

isense_status isense_report(const char* session_dir, const isense_analysis_options* opts, char** out_json) {
  if (!session_dir || !out_json) return invalid("session_dir/out_json");
  return guarded([&] { *out_json = dup_string(json_text(build_report(session_dir, to_options(opts)), 2)); });
}

isense_status isense_device_emulate(const isense_session* s, const char* listen, isense_pacing pacing,
                                    isense_listen_cb on_listen, void* user, char** out_report_json) {
  if (!s || !listen) return invalid("session/listen");
  return guarded([&] {
    const DecodedStream decoded = session_stream(s->session);
    DeviceStream stream;
    stream.pressure = decoded.pressure;
    stream.events = s->session.events;
    stream.device_id = s->session.manifest.device_id;
    stream.meta = json_text(json{{"session", s->session.manifest.id}, {"scenario", s->session.manifest.scenario}});
    const auto report = serve_device(stream, pacing == ISENSE_PACING_MAX ? Pacing::max : Pacing::realtime,
                                     parse_endpoint(listen), [&](std::uint16_t port) {
                                       if (on_listen) on_listen(port, user);
                                     });
    if (out_report_json) {
      *out_report_json = dup_string(json_text(json{{"data_frames", report.data_frames},
                                                   {"event_frames", report.event_frames},
                                                   {"meta_frames", report.meta_frames},
                                                   {"bytes", report.bytes},
                                                   {"wall_seconds", report.wall_seconds},
                                                   {"completed", report.completed}},
                                              2));
    }
    if (!report.completed) throw Error(Errc::sink_closed, "client disconnected before the end of the session");
  });
}

isense_status isense_record(const char* connect, const char* out_dir, int overwrite, double connect_timeout_s,
                            char** out_report_json) {
  if (!connect || !out_dir) return invalid("connect/out_dir");
  return guarded([&] {
    RecordOptions o;
    o.device = parse_endpoint(connect);
    o.out_dir = out_dir;
    o.overwrite = overwrite != 0;
    o.connect_timeout_s = connect_timeout_s;
    const RecordReport r = record_session(o);
    if (out_report_json) {
      *out_report_json =
          dup_string(json_text(json{{"bytes", r.bytes}, {"events", r.events}, {"health", to_json(r.health)}}, 2));
    }
  });
}

isense_status isense_host_create(const char* options_json, isense_host** out) {
  if (!options_json || !out) return invalid("options_json/out");
  return guarded([&] {
    json j;
    try {
      j = json::parse(options_json);
    } catch (const json::exception& e) {
      throw Error(Errc::usage, std::string("host options are not JSON: ") + e.what());
    }
    HostOptions o;
    try {
      const std::string source = j.at("source").get<std::string>();
      if (std::filesystem::is_directory(source)) {
        o.session_dir = source;
      } else {
        o.device = parse_endpoint(source);
      }
      if (j.contains("ui")) o.ui = parse_endpoint(j["ui"].get<std::string>());
      if (j.contains("ingest")) o.ingest = parse_endpoint(j["ingest"].get<std::string>());
      o.ui_dir = j.value("ui_dir", "");
      o.out_dir = j.value("out_dir", "");
      o.overwrite = j.value("overwrite", false);
      o.loop_replay = j.value("loop", false);
      o.replay_pacing = parse_pacing(j.value("pacing", "realtime"));
      o.subscriber_queue = j.value("queue", std::size_t{1024});
    } catch (const json::exception& e) {
      throw Error(Errc::usage, std::string("bad host options: ") + e.what());
    }
    *out = new isense_host{std::make_unique<HostService>(std::move(o))};
  });
}

isense_status isense_host_start(isense_host* h) {
  if (!h) return invalid("host");
  return guarded([&] { h->service->start(); });
}

isense_status isense_host_wait(isense_host* h) {
  if (!h) return invalid("host");
  return guarded([&] { h->service->wait(); });
}

isense_status isense_host_stop(isense_host* h) {
  if (!h) return invalid("host");
  return guarded([&] { h->service->stop(); });
}

uint16_t isense_host_ui_port(const isense_host* h) { return h ? h->service->ui_port() : 0; }

void isense_host_destroy(isense_host* h) { delete h; }

}  // extern "C"
