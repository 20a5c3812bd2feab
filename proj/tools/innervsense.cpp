#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <string>
#include <thread>
#include <atomic>
#include <vector>

#include <CLI11.hpp>

#include "innervsense/innervsense.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Failure of a library call: the status decides the exit code.
struct Failure {
  isense_status status;
};

void check(isense_status st) {
  if (st != ISENSE_OK) throw Failure{st};
}

// Owns a string handed out by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { isense_free_string(p); }
  char** out() { return &p; }
  const char* c_str() const { return p ? p : ""; }
};

struct ConfigHandle {
  isense_config* p = nullptr;
  ConfigHandle() { check(isense_config_create(&p)); }
  ~ConfigHandle() { isense_config_destroy(p); }
};

struct SessionHandle {
  isense_session* p = nullptr;
  ~SessionHandle() { isense_session_destroy(p); }
};

struct HostHandle {
  isense_host* p = nullptr;
  ~HostHandle() { isense_host_destroy(p); }
};

void print_line(const char* text) {
  std::fputs(text, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

struct ScenarioArgs {
  std::string scenario;
  std::string config;
  std::uint64_t seed = 1;
  std::vector<std::string> sets;

  void add_to(CLI::App* app, bool required) {
    auto* opt = app->add_option("--scenario", scenario, "Scenario to simulate");
    if (required) opt->required();
    app->add_option("--config", config, "key = value file with scenario and pad parameters")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Random seed (identical seeds give identical output)");
    app->add_option("--set", sets, "Parameter override KEY=VALUE (repeatable)");
  }

  void simulate(SessionHandle& out) const {
    ConfigHandle cfg;
    if (!config.empty()) check(isense_config_load(cfg.p, config.c_str()));
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected KEY=VALUE, got '" + kv + "'");
      check(isense_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    check(isense_simulate(scenario.c_str(), cfg.p, seed, &out.p));
  }
};

struct AnalysisArgs {
  isense_analysis_options opts = isense_analysis_options_default();
  std::string posthoc = "fisher_lsd";

  void add_filter_options(CLI::App* app) {
    app->add_option("--cutoff", opts.cutoff_hz, "Lowpass cutoff in Hz")->capture_default_str();
    app->add_option("--rest-start", opts.rest_start_s, "Offset window start after rest onset, s")->capture_default_str();
    app->add_option("--rest-end", opts.rest_end_s, "Offset window end after rest onset, s")->capture_default_str();
  }
  void add_stats_options(CLI::App* app) {
    app->add_option("--posthoc", posthoc, "Post-hoc method")
        ->check(CLI::IsMember({"fisher_lsd", "tukey_hsd"}))
        ->capture_default_str();
    app->add_option("--alpha", opts.alpha, "Significance level")->check(CLI::Range(1e-9, 0.5))->capture_default_str();
  }
  const isense_analysis_options* get() {
    opts.posthoc = posthoc == "tukey_hsd" ? ISENSE_POSTHOC_TUKEY_HSD : ISENSE_POSTHOC_FISHER_LSD;
    return &opts;
  }
};

isense_pacing to_pacing(const std::string& s) { return s == "max" ? ISENSE_PACING_MAX : ISENSE_PACING_REALTIME; }

void on_listen(std::uint16_t port, void*) {
  std::fprintf(stderr, "listening on port %u\n", static_cast<unsigned>(port));
  std::fflush(stderr);
}

// Runs the host until its source ends or SIGINT/SIGTERM arrives.
void run_host(const std::string& options_json) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  HostHandle host;
  check(isense_host_create(options_json.c_str(), &host.p));
  check(isense_host_start(host.p));
  std::fprintf(stderr, "dashboard on http://127.0.0.1:%u/\n", static_cast<unsigned>(isense_host_ui_port(host.p)));
  std::fflush(stderr);

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    isense_host_wait(host.p);
    done = true;
  });
  while (!done) {
    timespec ts{0, 200'000'000};
    if (sigtimedwait(&set, nullptr, &ts) > 0) break;
  }
  const isense_status st = isense_host_stop(host.p);
  waiter.join();
  check(st);
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* lvl = std::getenv("INNERVSENSE_LOG")) {
    if (isense_set_log_level(lvl) != ISENSE_OK) {
      std::fprintf(stderr, "warning: INNERVSENSE_LOG: %s\n", isense_last_error());
    }
  }

  CLI::App app{"Fluidic pressure pad toolkit: simulation, telemetry, recording and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(isense_version()));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a scenario and write a session directory");
  ScenarioArgs sim_args;
  sim_args.add_to(sim, true);
  std::string sim_out;
  bool sim_overwrite = false;
  sim->add_option("--out", sim_out, "Session directory to create")->required();
  sim->add_flag("--overwrite", sim_overwrite, "Replace an existing session directory");

  // device-emu
  auto* emu = app.add_subcommand("device-emu", "Stream a scenario or stored session as a device over TCP");
  ScenarioArgs emu_args;
  emu_args.add_to(emu, false);
  std::string emu_session;
  std::string emu_listen;
  std::string emu_pacing = "realtime";
  auto* emu_session_opt = emu->add_option("--session", emu_session, "Replay a stored session instead of simulating")
                              ->check(CLI::ExistingDirectory);
  emu_session_opt->excludes(emu->get_option("--scenario"));
  emu->add_option("--listen", emu_listen, "Address to listen on, host:port (port 0 picks one)")->required();
  emu->add_option("--pacing", emu_pacing, "Frame pacing")->check(CLI::IsMember({"realtime", "max"}))->capture_default_str();

  // record
  auto* rec = app.add_subcommand("record", "Record a device stream into a session directory");
  std::string rec_connect;
  std::string rec_out;
  bool rec_overwrite = false;
  double rec_timeout = 10.0;
  rec->add_option("--connect", rec_connect, "Device address host:port")->required();
  rec->add_option("--out", rec_out, "Session directory to create")->required();
  rec->add_flag("--overwrite", rec_overwrite, "Replace an existing session directory");
  rec->add_option("--timeout", rec_timeout, "Seconds to keep retrying the connection")->capture_default_str();

  // serve
  auto* srv = app.add_subcommand("serve", "Host the live dashboard stream, control channel and static UI");
  std::string srv_source;
  int srv_ui_port = 8080;
  std::string srv_ui_host = "127.0.0.1";
  int srv_ingest_port = -1;
  std::string srv_ui_dir;
  std::string srv_out;
  bool srv_overwrite = false;
  bool srv_loop = false;
  std::string srv_pacing = "realtime";
  std::size_t srv_queue = 1024;
  srv->add_option("--source", srv_source, "Device address host:port, or a session directory to replay")->required();
  srv->add_option("--ui-port", srv_ui_port, "Dashboard HTTP/WebSocket port")->check(CLI::Range(0, 65535))->capture_default_str();
  srv->add_option("--ui-host", srv_ui_host, "Dashboard bind address")->capture_default_str();
  srv->add_option("--ingest-port", srv_ingest_port, "Also accept raw frame streams on this TCP port")->check(CLI::Range(0, 65535));
  srv->add_option("--ui-dir", srv_ui_dir, "Directory of static dashboard assets")->check(CLI::ExistingDirectory);
  srv->add_option("--out", srv_out, "Session directory for live sources (default serve-<time>)");
  srv->add_flag("--overwrite", srv_overwrite, "Replace an existing session directory");
  srv->add_flag("--loop", srv_loop, "Replay a session directory endlessly");
  srv->add_option("--pacing", srv_pacing, "Replay pacing")->check(CLI::IsMember({"realtime", "max"}))->capture_default_str();
  srv->add_option("--queue", srv_queue, "Per-subscriber queue length")->check(CLI::Range(1, 1 << 20))->capture_default_str();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Analyses of a session; JSON on standard output");
  ana->require_subcommand(1);
  std::string ana_session;
  AnalysisArgs ana_args;
  auto add_session = [&](CLI::App* a) {
    a->add_option("--session", ana_session, "Session directory")->required()->check(CLI::ExistingDirectory);
  };
  auto* a_cal = ana->add_subcommand("calibrate", "Pressure vs. reference force linear fit");
  add_session(a_cal);
  auto* a_rel = ana->add_subcommand("relax", "Exponential stress-relaxation fit of the hold");
  add_session(a_rel);
  auto* a_con = ana->add_subcommand("condition", "Torque-pressure correlation per dynamometer condition");
  add_session(a_con);
  ana_args.add_filter_options(a_con);
  auto* a_cyc = ana->add_subcommand("cycles", "Cycle normalization and ensemble statistics (CSV to derived/)");
  add_session(a_cyc);
  ana_args.add_filter_options(a_cyc);
  auto* a_std = ana->add_subcommand("steady", "Minimum-CoV steady state of every hold (table to derived/)");
  add_session(a_std);
  ana_args.add_filter_options(a_std);
  a_std->add_option("--window", ana_args.opts.steady_window_s, "Window length, s")->capture_default_str();
  auto* a_ano = ana->add_subcommand("anova", "Two-way ANOVA with post-hoc comparisons");
  std::string anova_table;
  std::string anova_format = "json";
  auto* table_opt = a_ano->add_option("--table", anova_table, "CSV with angle_deg, mass_kg, rep, pressure_pa");
  auto* session_opt = a_ano->add_option("--session", ana_session, "Stepwise session (steady-state table computed)")
                          ->check(CLI::ExistingDirectory);
  table_opt->excludes(session_opt);
  ana_args.add_filter_options(a_ano);
  ana_args.add_stats_options(a_ano);
  a_ano->add_option("--window", ana_args.opts.steady_window_s, "Steady-state window length, s")->capture_default_str();
  a_ano->add_option("--format", anova_format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "Run every applicable analysis; writes derived/report.{md,json}");
  std::string rep_session;
  AnalysisArgs rep_args;
  rep->add_option("--session", rep_session, "Session directory")->required()->check(CLI::ExistingDirectory);
  rep_args.add_filter_options(rep);
  rep_args.add_stats_options(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    LibString out;
    if (*sim) {
      SessionHandle s;
      sim_args.simulate(s);
      check(isense_session_write(s.p, sim_out.c_str(), sim_overwrite));
      check(isense_session_info(s.p, out.out()));
      print_line(out.c_str());
    } else if (*emu) {
      SessionHandle s;
      if (!emu_session.empty()) {
        check(isense_session_read(emu_session.c_str(), &s.p));
      } else if (!emu_args.scenario.empty()) {
        emu_args.simulate(s);
      } else {
        throw CLI::ValidationError("device-emu", "needs --scenario or --session");
      }
      check(isense_device_emulate(s.p, emu_listen.c_str(), to_pacing(emu_pacing), on_listen, nullptr, out.out()));
      print_line(out.c_str());
    } else if (*rec) {
      check(isense_record(rec_connect.c_str(), rec_out.c_str(), rec_overwrite, rec_timeout, out.out()));
      print_line(out.c_str());
    } else if (*srv) {
      std::string opts = "{\"source\":\"" + json_escape(srv_source) + "\",\"ui\":\"" + json_escape(srv_ui_host) + ":" +
                         std::to_string(srv_ui_port) + "\",\"pacing\":\"" + srv_pacing + "\",\"loop\":" +
                         (srv_loop ? "true" : "false") + ",\"overwrite\":" + (srv_overwrite ? "true" : "false") +
                         ",\"queue\":" + std::to_string(srv_queue);
      if (srv_ingest_port >= 0) opts += ",\"ingest\":\"" + json_escape(srv_ui_host) + ":" + std::to_string(srv_ingest_port) + "\"";
      if (!srv_ui_dir.empty()) opts += ",\"ui_dir\":\"" + json_escape(srv_ui_dir) + "\"";
      if (!srv_out.empty()) opts += ",\"out_dir\":\"" + json_escape(srv_out) + "\"";
      opts += "}";
      run_host(opts);
    } else if (*ana) {
      const isense_analysis_options* o = ana_args.get();
      if (*a_ano) {
        const int as_text = anova_format == "text";
        if (!anova_table.empty()) {
          check(isense_anova_table(anova_table.c_str(), o, as_text, out.out()));
        } else if (!ana_session.empty()) {
          check(isense_anova_session(ana_session.c_str(), o, as_text, out.out()));
        } else {
          throw CLI::ValidationError("anova", "needs --table or --session");
        }
        std::fputs(out.c_str(), stdout);
        if (!as_text) std::fputc('\n', stdout);
      } else {
        const char* which = *a_cal ? "calibrate" : *a_rel ? "relax" : *a_con ? "condition" : *a_cyc ? "cycles" : "steady";
        check(isense_analyze(ana_session.c_str(), which, o, out.out()));
        print_line(out.c_str());
      }
    } else if (*rep) {
      check(isense_report(rep_session.c_str(), rep_args.get(), out.out()));
      print_line(out.c_str());
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", isense_last_error());
    return f.status == ISENSE_USAGE ? kExitUsage : kExitRuntime;
  }
  return 0;
}
