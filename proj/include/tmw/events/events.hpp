#pragma once

// Events are regions of a static model. An event occurs once every member of
// its region has acted since the previous occurrence (or the start of the trace).

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmw/core/model.hpp"
#include "tmw/error.hpp"
#include "tmw/exec/engine.hpp"

namespace tmw::events {

using exec::ActionRecord;
using exec::ActionTrace;
using exec::Tick;
using nlohmann::json;

struct EventDef {
  std::string id;
  std::string name;
  std::vector<std::string> region;  // stage ids and/or arc ids
  std::optional<std::string> guard;  // documents the selecting guard; not evaluated
  std::string doc;

  friend bool operator==(const EventDef&, const EventDef&) = default;
};

struct EventOccurrence {
  std::string event;
  Tick start = 0;
  Tick end = 0;

  friend bool operator==(const EventOccurrence&, const EventOccurrence&) = default;
};

using Edge = std::pair<std::string, std::string>;

struct BehavioralModel {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> start;

  bool has_node(std::string_view id) const { return std::find(nodes.begin(), nodes.end(), id) != nodes.end(); }
  bool has_edge(std::string_view from, std::string_view to) const {
    return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.first == from && e.second == to; });
  }
  bool is_start(std::string_view id) const { return std::find(start.begin(), start.end(), id) != start.end(); }
  std::vector<std::string> successors(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& [a, b] : edges) {
      if (a == id) out.push_back(b);
    }
    return out;
  }

  friend bool operator==(const BehavioralModel&, const BehavioralModel&) = default;
};

// "E9" < "E10": compares the non-digit prefix, then the trailing number.
inline bool natural_less(std::string_view a, std::string_view b) {
  auto split = [](std::string_view s) {
    std::size_t i = s.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
    std::string_view digits = s.substr(i);
    digits.remove_prefix(std::min(digits.find_first_not_of('0'), digits.size()));
    return std::pair{s.substr(0, i), digits};
  };
  auto [pa, na] = split(a);
  auto [pb, nb] = split(b);
  if (pa != pb) return pa < pb;
  if (na.size() != nb.size()) return na.size() < nb.size();
  if (na != nb) return na < nb;
  return a < b;
}

// Every def has a non-empty region naming existing stages or arcs, and ids are unique.
inline void check_definitions(const std::vector<EventDef>& defs, const core::StaticModel& model) {
  std::set<std::string> ids;
  for (const auto& d : defs) {
    if (!ids.insert(d.id).second) throw DefinitionError("duplicate event id '" + d.id + "'");
    if (d.region.empty()) throw DefinitionError("event '" + d.id + "' has an empty region");
    for (const auto& r : d.region) {
      if (!model.find_stage(r) && !model.find_flow(r) && !model.find_trigger(r)) {
        throw DefinitionError("event '" + d.id + "' region names unknown id '" + r + "'");
      }
    }
  }
}

class EventDetector {
 public:
  explicit EventDetector(std::vector<EventDef> defs) : defs_(std::make_shared<const Index>(std::move(defs))) {
    for (const auto& d : defs_->defs) progress_.push_back(Progress{std::vector<std::optional<Tick>>(d.region.size()), 0});
  }

  void feed(const ActionRecord& r) {
    match(r.stage, r.tick);
    if (r.via) match(*r.via, r.tick);
  }

  // Completed occurrences in (end tick, event id) order, removed from the buffer.
  std::vector<EventOccurrence> flush() {
    std::stable_sort(ready_.begin(), ready_.end(), [](const EventOccurrence& a, const EventOccurrence& b) {
      if (a.end != b.end) return a.end < b.end;
      return natural_less(a.event, b.event);
    });
    return std::exchange(ready_, {});
  }

  const std::vector<EventDef>& defs() const noexcept { return defs_->defs; }

 private:
  struct Index {
    explicit Index(std::vector<EventDef> d) : defs(std::move(d)) {
      for (std::size_t i = 0; i < defs.size(); ++i) {
        for (std::size_t m = 0; m < defs[i].region.size(); ++m) members[defs[i].region[m]].emplace_back(i, m);
      }
    }
    std::vector<EventDef> defs;
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>, std::less<>> members;
  };

  struct Progress {
    std::vector<std::optional<Tick>> seen;  // latest tick per region member
    std::size_t satisfied = 0;
  };

  void match(std::string_view id, Tick tick) {
    auto it = defs_->members.find(id);
    if (it == defs_->members.end()) return;
    for (auto [d, m] : it->second) {
      auto& p = progress_[d];
      if (!p.seen[m]) ++p.satisfied;
      p.seen[m] = tick;
      if (p.satisfied == p.seen.size()) {
        Tick lo = tick, hi = tick;
        for (auto& s : p.seen) {
          lo = std::min(lo, *s);
          hi = std::max(hi, *s);
          s.reset();
        }
        p.satisfied = 0;
        ready_.push_back(EventOccurrence{defs_->defs[d].id, lo, hi});
      }
    }
  }

  std::shared_ptr<const Index> defs_;
  std::vector<Progress> progress_;
  std::vector<EventOccurrence> ready_;
};

inline std::vector<EventOccurrence> detect_events(const ActionTrace& trace, const std::vector<EventDef>& defs) {
  EventDetector detector(defs);
  for (const auto& r : trace) detector.feed(r);
  return detector.flush();
}

inline std::vector<EventOccurrence> detect_events(const ActionTrace& trace, const std::vector<EventDef>& defs,
                                                  const core::StaticModel& model) {
  check_definitions(defs, model);
  return detect_events(trace, defs);
}

struct Verdict {
  bool conformant = true;
  std::optional<std::size_t> index;  // first offending position
  std::optional<Edge> pair;          // (previous, offending); previous is empty for a bad start

  explicit operator bool() const noexcept { return conformant; }
};

inline void check_behavior(const BehavioralModel& behavior) {
  for (const auto& [a, b] : behavior.edges) {
    if (!behavior.has_node(a) || !behavior.has_node(b)) {
      throw DefinitionError("behavioral edge (" + a + ", " + b + ") uses an undeclared node");
    }
  }
  for (const auto& s : behavior.start) {
    if (!behavior.has_node(s)) throw DefinitionError("start node '" + s + "' is not declared");
  }
}

inline Verdict conforms(const std::vector<EventOccurrence>& occurrences, const BehavioralModel& behavior) {
  check_behavior(behavior);
  for (const auto& o : occurrences) {
    if (!behavior.has_node(o.event)) throw DefinitionError("event '" + o.event + "' is not a behavioral node");
  }
  if (occurrences.empty()) return {};
  if (!behavior.is_start(occurrences.front().event)) {
    return Verdict{false, 0, Edge{"", occurrences.front().event}};
  }
  for (std::size_t i = 1; i < occurrences.size(); ++i) {
    const auto& prev = occurrences[i - 1].event;
    const auto& cur = occurrences[i].event;
    if (!behavior.has_edge(prev, cur)) return Verdict{false, i, Edge{prev, cur}};
  }
  return {};
}

// Ids of `defs` never observed, in definition order.
inline std::vector<std::string> coverage(const std::vector<EventOccurrence>& occurrences,
                                         const std::vector<EventDef>& defs) {
  std::set<std::string, std::less<>> seen;
  for (const auto& o : occurrences) seen.insert(o.event);
  std::vector<std::string> missing;
  for (const auto& d : defs) {
    if (!seen.contains(d.id)) missing.push_back(d.id);
  }
  return missing;
}

inline json to_json(const EventDef& d) {
  json j{{"id", d.id}, {"name", d.name}, {"region", d.region}, {"doc", d.doc}};
  if (d.guard) j["guard"] = *d.guard;
  return j;
}

inline json to_json(const EventOccurrence& o) { return json{{"event", o.event}, {"start", o.start}, {"end", o.end}}; }

inline json to_json(const BehavioralModel& b) {
  json edges = json::array();
  for (const auto& [x, y] : b.edges) edges.push_back(json::array({x, y}));
  return json{{"nodes", b.nodes}, {"edges", std::move(edges)}, {"start", b.start}};
}

template <typename T>
json to_json(const std::vector<T>& items) {
  json j = json::array();
  for (const auto& item : items) j.push_back(to_json(item));
  return j;
}

inline std::vector<EventDef> defs_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("event definitions must be a JSON array");
  std::vector<EventDef> defs;
  try {
    for (const auto& d : j) {
      EventDef def{d.at("id").get<std::string>(), d.value("name", std::string{}),
                   d.at("region").get<std::vector<std::string>>(), std::nullopt, d.value("doc", std::string{})};
      if (auto it = d.find("guard"); it != d.end() && !it->is_null()) def.guard = it->get<std::string>();
      defs.push_back(std::move(def));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("event definition schema: ") + e.what());
  }
  return defs;
}

inline std::vector<EventOccurrence> occurrences_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("occurrences must be a JSON array");
  std::vector<EventOccurrence> out;
  try {
    for (const auto& o : j) out.push_back({o.at("event").get<std::string>(), o.at("start").get<Tick>(), o.at("end").get<Tick>()});
  } catch (const json::exception& e) {
    throw SchemaError(std::string("occurrence schema: ") + e.what());
  }
  return out;
}

inline BehavioralModel behavior_from_json(const json& j) {
  try {
    BehavioralModel b;
    b.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw SchemaError("behavioral edge must be a [from, to] pair");
      b.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    b.start = j.at("start").get<std::vector<std::string>>();
    return b;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("behavioral model schema: ") + e.what());
  }
}

inline std::string behavior_to_dot(const BehavioralModel& b, std::string_view name = "behavior") {
  std::string out = "digraph \"" + std::string(name) + "\" {\n  node [shape=circle];\n";
  for (const auto& n : b.nodes) {
    out += "  \"" + n + "\"";
    if (b.is_start(n)) out += " [shape=doublecircle]";
    out += ";\n";
  }
  for (const auto& [x, y] : b.edges) out += "  \"" + x + "\" -> \"" + y + "\";\n";
  out += "}\n";
  return out;
}

}  // namespace tmw::events
