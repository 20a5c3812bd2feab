#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "innervsense/config.hpp"
#include "innervsense/session.hpp"
#include "session_gen.hpp"
#include "test_support.hpp"

using namespace innervsense;
namespace fs = std::filesystem;

using testsupport::random_session;

TEST_CASE("write-read round trip over generated sessions") {
  testsupport::TempDir tmp;
  std::mt19937_64 rng(50);
  for (int i = 0; i < 50; ++i) {
    const Session s = random_session(rng);
    const std::string dir = tmp.sub("s" + std::to_string(i));
    write_session(dir, s);
    const Session back = read_session(dir);
    CAPTURE(i);
    REQUIRE(back.manifest == s.manifest);
    REQUIRE(back.raw == s.raw);
    REQUIRE(back.events == s.events);
    REQUIRE(back.truth == s.truth);
    REQUIRE(back == s);
  }
}

TEST_CASE("simulated sessions round trip") {
  testsupport::TempDir tmp;
  for (auto name : scenario_names()) {
    const auto data = run_scenario(parse_scenario(name), KeyValueConfig{}, 5);
    const Session s = session_from_simulation(data);
    CHECK(s.manifest.id == "sim-" + std::string(name) + "-5");
    CHECK(s.manifest.source == "simulation");
    REQUIRE(s.manifest.pad.has_value());
    CHECK(*s.manifest.pad == data.pad);
    write_session(tmp.sub(std::string(name)), s);
    CHECK(read_session(tmp.sub(std::string(name))) == s);
  }
}

TEST_CASE("raw.bin holds fixed-size data frames") {
  testsupport::TempDir tmp;
  auto data = run_scenario(ScenarioKind::ramp_hold_unload, KeyValueConfig{}, 1);
  std::vector<std::int64_t> t(data.pressure.t_us().begin(), data.pressure.t_us().begin() + 500);
  std::vector<double> v(data.pressure.values().begin(), data.pressure.values().begin() + 500);
  data.pressure = TimeSeries::from_us(t, v, Unit::pascal, 50.0);
  write_session(tmp.sub("s"), session_from_simulation(data));
  CHECK(fs::file_size(tmp.path() / "s" / "raw.bin") == 500 * data_frame_size(1));
  CHECK(data_frame_size(1) == 21);
}

TEST_CASE("the decoded stream carries quantized pressure") {
  const auto data = run_scenario(ScenarioKind::ramp_hold_unload, KeyValueConfig{}, 2);
  const Session s = session_from_simulation(data);
  const auto decoded = session_stream(s);
  REQUIRE(decoded.pressure.size() == data.pressure.size());
  CHECK(decoded.health.frames_ok == data.pressure.size());
  for (std::size_t i = 0; i < data.pressure.size(); ++i) {
    REQUIRE(decoded.pressure.t_us()[i] == data.pressure.t_us()[i]);
    REQUIRE(decoded.pressure.value(i) == quantize_pressure(data.pressure.value(i)));
  }
}

TEST_CASE("layout on disk") {
  testsupport::TempDir tmp;
  const auto s = session_from_simulation(run_scenario(ScenarioKind::dynamometer_trial, KeyValueConfig{}, 1));
  write_session(tmp.sub("s"), s);
  const fs::path d = tmp.path() / "s";
  CHECK(fs::exists(d / "manifest.json"));
  CHECK(fs::exists(d / "raw.bin"));
  CHECK(fs::exists(d / "events.jsonl"));
  CHECK(fs::exists(d / "truth" / "torque.csv"));
  CHECK(fs::is_directory(d / "derived"));
  std::ifstream ev(d / "events.jsonl");
  std::string line;
  double prev = -1.0;
  std::size_t lines = 0;
  while (std::getline(ev, line)) {
    const Event e = event_from_json(line);
    CHECK(e.t_s() >= prev);
    prev = e.t_s();
    ++lines;
  }
  CHECK(lines == s.events.size());
}

TEST_CASE("write refuses to clobber") {
  testsupport::TempDir tmp;
  std::mt19937_64 rng(1);
  const Session s = random_session(rng);
  write_session(tmp.sub("s"), s);
  CHECK_ERRC(write_session(tmp.sub("s"), s), Errc::already_exists);
  CHECK_NOTHROW(write_session(tmp.sub("s"), s, true));

  fs::create_directories(tmp.path() / "other");
  std::ofstream(tmp.path() / "other" / "notes.txt") << "keep me";
  CHECK_ERRC(write_session(tmp.sub("other"), s, true), Errc::already_exists);
  CHECK(fs::exists(tmp.path() / "other" / "notes.txt"));
}

TEST_CASE("read errors") {
  testsupport::TempDir tmp;
  std::mt19937_64 rng(2);
  const Session s = random_session(rng);
  const fs::path d = tmp.path() / "s";

  SUBCASE("missing manifest") {
    write_session(d.string(), s);
    fs::remove(d / "manifest.json");
    CHECK_ERRC(read_session(d.string()), Errc::corrupt_session);
  }
  SUBCASE("garbled manifest") {
    write_session(d.string(), s);
    std::ofstream(d / "manifest.json") << "{ not json";
    CHECK_ERRC(read_session(d.string()), Errc::corrupt_session);
  }
  SUBCASE("future schema version") {
    write_session(d.string(), s);
    std::ifstream in(d / "manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    const auto pos = text.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"schema_version\": 2");
    std::ofstream(d / "manifest.json") << text;
    CHECK_ERRC(read_session(d.string()), Errc::version_mismatch);
  }
  SUBCASE("missing raw log") {
    write_session(d.string(), s);
    fs::remove(d / "raw.bin");
    CHECK_ERRC(read_session(d.string()), Errc::corrupt_session);
  }
  SUBCASE("no directory") { CHECK_ERRC(read_session((tmp.path() / "nope").string()), Errc::io_error); }
}

TEST_CASE("truncated raw log still loads") {
  testsupport::TempDir tmp;
  const auto s = session_from_simulation(run_scenario(ScenarioKind::step_hold_relax, KeyValueConfig::parse("hold_s = 10\n"), 1));
  const fs::path d = tmp.path() / "s";
  write_session(d.string(), s);
  fs::resize_file(d / "raw.bin", fs::file_size(d / "raw.bin") - 9);
  const Session back = read_session(d.string());
  const auto decoded = session_stream(back);
  CHECK(decoded.pressure.size() + 1 == session_stream(s).pressure.size());
  CHECK(decoded.health.truncated_bytes == data_frame_size(1) - 9);
  CHECK(decoded.health.frames_resync >= 0);
}

TEST_CASE("corrupted frames surface as health, not errors") {
  testsupport::TempDir tmp;
  const auto s = session_from_simulation(run_scenario(ScenarioKind::ramp_hold_unload, KeyValueConfig{}, 1));
  const fs::path d = tmp.path() / "s";
  write_session(d.string(), s);
  {
    std::fstream f(d / "raw.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(data_frame_size(1) * 10 + 18));
    f.put('\x55');
  }
  const auto decoded = session_stream(read_session(d.string()));
  CHECK(decoded.health.frames_crc_fail + decoded.health.frames_resync >= 1);
  CHECK(decoded.pressure.size() == session_stream(s).pressure.size() - 1);
}

TEST_CASE("derived artifacts and appended events") {
  testsupport::TempDir tmp;
  std::mt19937_64 rng(3);
  Session s = random_session(rng);
  s.events = {begin_event(1000000, "rest"), end_event(3000000, "rest")};
  const std::string d = tmp.sub("s");
  write_session(d, s);
  const auto raw_before = read_session(d).raw;

  add_derived(d, "summary.txt", "hello\n");
  auto back = read_session(d);
  CHECK(back.manifest.derived.at("summary.txt") == "derived/summary.txt");
  CHECK(back.raw == raw_before);

  const std::vector<Event> more{Event{2000000, "annotate", "mid", {}, {}}, Event{5000000, "trial_start", "late", {}, {}}};
  append_events(d, more);
  back = read_session(d);
  REQUIRE(back.events.size() == 4);
  CHECK(back.events[1].label == "mid");
  CHECK(back.events[3].type == "trial_start");
  CHECK(back.raw == raw_before);
}

TEST_CASE("session writer") {
  testsupport::TempDir tmp;
  SessionManifest m;
  m.id = "rec-test";
  m.source = "recording";
  m.created_at = iso8601_from_epoch(0);
  m.device_address = "127.0.0.1:9000";
  const std::string d = tmp.sub("rec");
  {
    SessionWriter w(d, m, false);
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < 20; ++i) append_frame(bytes, Frame{MsgType::data, 1, static_cast<std::uint16_t>(i), static_cast<std::uint64_t>(i) * 20000, {100}, {}});
    w.append_raw(std::span(bytes).first(100));
    w.append_raw(std::span(bytes).subspan(100));
    w.append_event(Event{300000, "annotate", "second", {}, {}});
    w.append_event(Event{100000, "annotate", "first", {}, {}});
    CHECK(w.raw_bytes() == bytes.size());
    CHECK(w.event_count() == 2);
    CHECK_FALSE(fs::exists(fs::path(d) / "manifest.json"));
    w.finalize();
    CHECK_ERRC(w.append_raw(bytes), Errc::io_error);
  }
  const Session s = read_session(d);
  CHECK(s.manifest == m);
  CHECK(s.raw.size() == 20 * data_frame_size(1));
  REQUIRE(s.events.size() == 2);
  CHECK(s.events[0].label == "first");
  CHECK_ERRC(SessionWriter(d, m, false), Errc::already_exists);
}

TEST_CASE("timestamps") {
  CHECK(iso8601_from_epoch(0) == "1970-01-01T00:00:00Z");
  CHECK(iso8601_from_epoch(1700000000) == "2023-11-14T22:13:20Z");
  CHECK(now_iso8601().size() == 20);
}
