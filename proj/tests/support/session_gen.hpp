#pragma once

#include <cmath>
#include <random>
#include <string>

#include "innervsense/scenario.hpp"
#include "innervsense/session.hpp"

// Random but valid sessions: simulation or recording manifests, frame logs
// with occasional trailing junk, events with awkward text and numbers, and
// irregular truth channels.
namespace testsupport {

using namespace innervsense;

inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const char* alphabet[] = {"a", "b", "X", "0", "9", " ", "_", "-", ".", ",", ":", "\"", "\\", "/", "{", "]", "\t", "\xc3\xa9", "\xe2\x82\xac"};
  std::string s;
  const std::size_t n = rng() % (max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % std::size(alphabet)];
  return s;
}

inline std::string random_key(std::mt19937_64& rng) {
  static const char* keys[] = {"mass_kg", "angle_deg", "cycle", "trial", "rep", "target_force_n", "d_mm", "x"};
  return keys[rng() % std::size(keys)];
}

inline double random_double(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  switch (rng() % 4) {
    case 0: return 2.27;
    case 1: return 1.0 / 3.0;
    case 2: return std::ldexp(n(rng), static_cast<int>(rng() % 60) - 30);
    default: return static_cast<double>(static_cast<int>(rng() % 1000) - 500);
  }
}

inline innervsense::Session random_session(std::mt19937_64& rng) {
  Session s;
  auto& m = s.manifest;
  m.id = "gen-" + std::to_string(rng() % 100000);
  m.created_at = iso8601_from_epoch(static_cast<std::int64_t>(rng() % 2000000000));
  if (rng() % 2) {
    m.source = "simulation";
    m.scenario = std::string(scenario_names()[rng() % scenario_names().size()]);
    m.seed = rng();
    PadParams p;
    p.a = 20.0 + random_double(rng) * 1e-3;
    p.tau = 1.0 + static_cast<double>(rng() % 1000) / 7.0;
    p.noise_sigma = static_cast<double>(rng() % 10);
    m.pad = p;
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) m.params["p" + std::to_string(i)] = random_text(rng, 8);
  } else {
    m.source = "recording";
    m.device_address = "127.0.0.1:" + std::to_string(1024 + rng() % 60000);
    m.device_id = static_cast<std::uint16_t>(rng());
  }

  // raw: valid frames, sometimes followed by junk
  const std::size_t frames = rng() % 300;
  for (std::size_t i = 0; i < frames; ++i) {
    Frame f{MsgType::data, m.device_id, static_cast<std::uint16_t>(i), i * 20000, {static_cast<std::int16_t>(rng())}, {}};
    if (rng() % 50 == 0) {
      f.type = MsgType::event;
      f.channels.clear();
      f.text = random_text(rng, 20);
    }
    append_frame(s.raw, f);
  }
  if (rng() % 4 == 0) {
    for (int i = 0; i < 13; ++i) s.raw.push_back(static_cast<std::uint8_t>(rng()));
  }

  const std::size_t n_events = rng() % 40;
  static const char* types[] = {"begin", "end", "annotate", "trial_start", "trial_stop"};
  for (std::size_t i = 0; i < n_events; ++i) {
    Event e;
    e.t_us = static_cast<std::int64_t>(rng() % 100000000000ULL);
    e.type = types[rng() % 5];
    e.label = random_text(rng, 12);
    for (int k = 0, n = static_cast<int>(rng() % 3); k < n; ++k) e.values[random_key(rng)] = random_double(rng);
    if (rng() % 3 == 0) e.tags["condition"] = random_text(rng, 16);
    s.events.push_back(e);
  }
  sort_events(s.events);

  static const std::pair<const char*, Unit> channels[] = {
      {"force", Unit::newton}, {"displacement", Unit::millimetre}, {"torque", Unit::newton_metre}, {"angle", Unit::degree}};
  for (const auto& [name, unit] : channels) {
    if (rng() % 2) continue;
    std::vector<std::int64_t> t;
    std::vector<double> v;
    std::int64_t now = static_cast<std::int64_t>(rng() % 1000);
    for (int i = 0, n = 1 + static_cast<int>(rng() % 500); i < n; ++i) {
      t.push_back(now);
      v.push_back(random_double(rng));
      now += 1 + static_cast<std::int64_t>(rng() % 20000);
    }
    s.truth[name] = TimeSeries::from_us(t, v, unit);
    m.truth_units[name] = std::string(unit_name(unit));
  }
  return s;
}

}  // namespace testsupport
