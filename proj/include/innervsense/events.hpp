#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace innervsense {

// Timestamped annotation. Experiment structure (phases, cycles, holds) is
// carried as begin/end pairs sharing a label; free-form operator input uses
// the types "annotate", "trial_start" and "trial_stop".
struct Event {
  std::int64_t t_us = 0;
  std::string type;   // "begin", "end", "annotate", "trial_start", "trial_stop"
  std::string label;  // e.g. "rest", "hold", "cycle", "trial"
  std::map<std::string, double> values;       // mass_kg, angle_deg, cycle, ...
  std::map<std::string, std::string> tags;    // condition, ...

  double t_s() const { return static_cast<double>(t_us) * 1e-6; }
  double value_or(const std::string& key, double fallback) const;
  std::string tag_or(const std::string& key, const std::string& fallback) const;

  friend bool operator==(const Event&, const Event&) = default;
};

Event begin_event(std::int64_t t_us, std::string label, std::map<std::string, double> values = {},
                  std::map<std::string, std::string> tags = {});
Event end_event(std::int64_t t_us, std::string label, std::map<std::string, double> values = {},
                std::map<std::string, std::string> tags = {});

// One JSON object: {"t_s":..,"type":..,"label":..,<values>,<tags>}.
std::string event_to_json(const Event& e);
Event event_from_json(std::string_view text);

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;
  Event begin;  // carries the attributes of the interval
};

// Pairs each "begin" with the next "end" of the same label, in time order.
std::vector<Interval> intervals(std::span<const Event> events, std::string_view label);

void sort_events(std::vector<Event>& events);

}  // namespace innervsense
