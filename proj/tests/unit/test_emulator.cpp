#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <thread>

#include "innervsense/config.hpp"
#include "innervsense/emulator.hpp"
#include "innervsense/publisher.hpp"
#include "innervsense/scenario.hpp"
#include "test_support.hpp"

using namespace innervsense;

namespace {

TimeSeries ramp(std::size_t n) {
  std::vector<std::int64_t> t(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<std::int64_t>(i) * 20000;
    v[i] = static_cast<double>(i) * 1.5;
  }
  return TimeSeries::from_us(t, v, Unit::pascal, 50.0);
}

}  // namespace

TEST_CASE("emulated stream decodes to the source") {
  DeviceStream s;
  s.pressure = ramp(500);
  s.events = {begin_event(0, "rest"), end_event(2000000, "rest"), Event{5000000, "annotate", "note", {{"k", 1.5}}, {}}};
  s.meta = "{\"session\":\"x\"}";
  s.device_id = 9;
  VectorSink sink;
  const auto rep = emulate_device(s, Pacing::max, sink);
  CHECK(rep.completed);
  CHECK(rep.data_frames == 500);
  CHECK(rep.event_frames == 3);
  CHECK(rep.meta_frames == 1);
  CHECK(rep.bytes == sink.data.size());

  const auto d = decode_stream(sink.data);
  CHECK(d.health.frames_ok == 504);
  CHECK(d.health.gaps == 0);
  CHECK(d.pressure == s.pressure);
  CHECK(d.events == s.events);
  REQUIRE(d.meta.size() == 1);
  CHECK(d.meta[0] == s.meta);
}

TEST_CASE("events go out before samples with the same timestamp") {
  DeviceStream s;
  s.pressure = ramp(10);
  s.events = {Event{100000, "annotate", "at sample 5", {}, {}}};
  VectorSink sink;
  emulate_device(s, Pacing::max, sink);
  const auto frames = decode_all(sink.data);
  REQUIRE(frames.size() == 11);
  CHECK(frames[5].type == MsgType::event);
  CHECK(frames[6].type == MsgType::data);
  CHECK(frames[6].timestamp_us == 100000);
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(frames[i].seq == i);
}

TEST_CASE("pressure frames saturate at the ADC limits") {
  const auto t = TimeSeries::from_us({0, 20000, 40000}, {5000.0, -5000.0, 3114.0}, Unit::pascal);
  const auto d = decode_stream(encode_pressure_frames(t));
  CHECK(d.pressure.value(0) == doctest::Approx(3276.7));
  CHECK(d.pressure.value(1) == doctest::Approx(-3276.8));
  CHECK(d.pressure.value(2) == 3114.0);
}

TEST_CASE("sequence numbers wrap") {
  const auto bytes = encode_pressure_frames(ramp(70000));
  const auto frames = decode_all(bytes);
  CHECK(frames[65535].seq == 65535);
  CHECK(frames[65536].seq == 0);
  StreamHealth h;
  decode_all(bytes, &h);
  CHECK(h.gaps == 0);
}

TEST_CASE("non-event text becomes an annotation") {
  const Frame f{MsgType::event, 1, 0, 1234567, {}, "operator pressed key"};
  const Event e = event_from_frame(f);
  CHECK(e.type == "annotate");
  CHECK(e.label == "operator pressed key");
  CHECK(e.t_us == 1234567);
}

TEST_CASE("a closed sink stops the device") {
  DeviceStream s;
  s.pressure = ramp(100);
  int writes = 0;
  CallbackSink sink([&](std::span<const std::uint8_t>) { return ++writes <= 10; });
  const auto rep = emulate_device(s, Pacing::max, sink);
  CHECK_FALSE(rep.completed);
  CHECK(rep.data_frames == 10);
}

TEST_CASE("realtime pacing holds the 50 Hz schedule") {
  DeviceStream s;
  s.pressure = ramp(51);
  using clock = std::chrono::steady_clock;
  std::vector<clock::time_point> when;
  CallbackSink sink([&](std::span<const std::uint8_t>) {
    when.push_back(clock::now());
    return true;
  });
  const auto rep = emulate_device(s, Pacing::realtime, sink);
  REQUIRE(when.size() == 51);
  CHECK(rep.wall_seconds == doctest::Approx(1.0).epsilon(0.05));
  // Frames are scheduled against absolute times: none go out early and a
  // late frame does not push back the ones after it.
  std::vector<double> err;
  for (std::size_t i = 0; i < when.size(); ++i) {
    const double offset_ms = std::chrono::duration<double, std::milli>(when[i] - when[0]).count();
    err.push_back(offset_ms - 20.0 * static_cast<double>(i));
  }
  CHECK(*std::min_element(err.begin(), err.end()) > -0.5);
  CHECK(*std::max_element(err.begin(), err.end()) < 20.0);
  std::nth_element(err.begin(), err.begin() + 25, err.end());
  CHECK(std::abs(err[25]) < 2.0);
}

TEST_CASE("pacing names") {
  CHECK(parse_pacing("realtime") == Pacing::realtime);
  CHECK(parse_pacing("max") == Pacing::max);
  CHECK_ERRC(parse_pacing("fast"), Errc::usage);
}

TEST_CASE("publisher fans out in order") {
  Publisher<int> pub;
  auto a = pub.subscribe(100);
  auto b = pub.subscribe(100);
  for (int i = 0; i < 50; ++i) pub.publish(i);
  for (auto* s : {&a, &b}) {
    for (int i = 0; i < 50; ++i) REQUIRE((*s)->try_pop().value() == i);
    CHECK_FALSE((*s)->try_pop().has_value());
    CHECK((*s)->drops() == 0);
  }
  CHECK(pub.published() == 50);
}

TEST_CASE("slow subscribers drop the oldest items") {
  Publisher<int> pub;
  auto slow = pub.subscribe(10);
  auto fast = pub.subscribe(1000);
  for (int i = 0; i < 100; ++i) {
    pub.publish(i);
    fast->try_pop();
  }
  CHECK(slow->drops() == 90);
  CHECK(slow->delivered() == 100);
  CHECK(slow->pending() == 10);
  CHECK(slow->try_pop().value() == 90);
  CHECK(fast->drops() == 0);
}

TEST_CASE("released subscribers are forgotten") {
  Publisher<int> pub;
  auto a = pub.subscribe();
  {
    auto b = pub.subscribe();
    CHECK(pub.subscriber_count() == 2);
  }
  CHECK(pub.subscriber_count() == 1);
  a->close();
  pub.publish(1);
  CHECK(pub.subscriber_count() == 0);
  CHECK_FALSE(a->try_pop().has_value());
}

TEST_CASE("pop_for wakes on publish and on close") {
  Publisher<int> pub;
  auto sub = pub.subscribe();
  std::thread producer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    pub.publish(7);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    pub.close_all();
  });
  CHECK(sub->pop_for(std::chrono::seconds(5)).value() == 7);
  CHECK_FALSE(sub->pop_for(std::chrono::seconds(5)).has_value());
  CHECK(sub->closed());
  producer.join();
}

TEST_CASE("concurrent publishing keeps per-subscriber order") {
  Publisher<int> pub;
  auto sub = pub.subscribe(1000000);
  std::thread t1([&] {
    for (int i = 0; i < 20000; ++i) pub.publish(i);
  });
  std::vector<int> got;
  while (got.size() < 20000) {
    if (auto v = sub->pop_for(std::chrono::milliseconds(100))) got.push_back(*v);
  }
  t1.join();
  for (int i = 0; i < 20000; ++i) REQUIRE(got[static_cast<std::size_t>(i)] == i);
}
