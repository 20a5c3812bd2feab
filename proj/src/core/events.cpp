#include "innervsense/events.hpp"

#include <algorithm>
#include <json.hpp>

#include "innervsense/error.hpp"
#include "innervsense/time_series.hpp"
#include "json_text.hpp"

namespace innervsense {

using nlohmann::json;

double Event::value_or(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::string Event::tag_or(const std::string& key, const std::string& fallback) const {
  const auto it = tags.find(key);
  return it == tags.end() ? fallback : it->second;
}

Event begin_event(std::int64_t t_us, std::string label, std::map<std::string, double> values,
                  std::map<std::string, std::string> tags) {
  return Event{t_us, "begin", std::move(label), std::move(values), std::move(tags)};
}

Event end_event(std::int64_t t_us, std::string label, std::map<std::string, double> values,
                std::map<std::string, std::string> tags) {
  return Event{t_us, "end", std::move(label), std::move(values), std::move(tags)};
}

std::string event_to_json(const Event& e) {
  json j = json::object();
  j["t_s"] = e.t_s();
  j["type"] = e.type;
  j["label"] = e.label;
  for (const auto& [k, v] : e.values) j[k] = v;
  for (const auto& [k, v] : e.tags) j[k] = v;
  return json_text(j);
}

Event event_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(Errc::corrupt_session, std::string("bad event JSON: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("t_s") || !j["t_s"].is_number() || !j.contains("type") ||
      !j["type"].is_string()) {
    throw Error(Errc::corrupt_session, "event needs numeric t_s and string type");
  }
  Event e;
  e.t_us = seconds_to_us(j["t_s"].get<double>());
  e.type = j["type"].get<std::string>();
  if (j.contains("label") && j["label"].is_string()) e.label = j["label"].get<std::string>();
  for (const auto& [k, v] : j.items()) {
    if (k == "t_s" || k == "type" || k == "label") continue;
    if (v.is_number()) {
      e.values[k] = v.get<double>();
    } else if (v.is_string()) {
      e.tags[k] = v.get<std::string>();
    } else if (v.is_boolean()) {
      e.tags[k] = v.get<bool>() ? "true" : "false";
    }
  }
  return e;
}

std::vector<Interval> intervals(std::span<const Event> events, std::string_view label) {
  std::vector<Interval> out;
  const Event* open = nullptr;
  for (const auto& e : events) {
    if (e.label != label) continue;
    if (e.type == "begin") {
      open = &e;
    } else if (e.type == "end" && open != nullptr) {
      out.push_back(Interval{open->t_s(), e.t_s(), *open});
      open = nullptr;
    }
  }
  return out;
}

void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
}

}  // namespace innervsense
