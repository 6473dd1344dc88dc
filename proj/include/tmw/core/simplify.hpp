#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tmw/core/model.hpp"
#include "tmw/core/validate.hpp"

namespace tmw::core {

namespace detail {

using Adjacency = std::map<std::string, std::vector<std::string>, std::less<>>;

// Create/Process stages reachable from `start` through removed stages only.
inline std::vector<std::string> core_frontier(const StaticModel& model, const Adjacency& edges,
                                              const std::string& start) {
  std::vector<std::string> found;
  std::set<std::string> seen{start};
  std::vector<std::string> stack{start};
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    auto it = edges.find(cur);
    if (it == edges.end()) continue;
    // Reverse push keeps declaration order when popping.
    for (auto next = it->second.rbegin(); next != it->second.rend(); ++next) {
      if (!seen.insert(*next).second) continue;
      if (is_core_kind(model.stage(*next).kind)) {
        found.push_back(*next);
      } else {
        stack.push_back(*next);
      }
    }
  }
  return found;
}

}  // namespace detail

// Removes every Release/Transfer/Receive stage, joining the Create/Process stages
// on either side with direct arcs. Triggers touching removed stages are re-anchored
// on the nearest Create/Process stages; a trigger with no such stage on one side
// is dropped.
inline StaticModel simplify(const StaticModel& model) {
  require_valid(model);

  bool any_removed = false;
  for (const auto& s : model.stages()) any_removed |= !is_core_kind(s.kind);
  if (!any_removed) return model;

  detail::Adjacency forward, backward;
  for (const auto& f : model.flows()) {
    forward[f.from].push_back(f.to);
    backward[f.to].push_back(f.from);
  }

  std::vector<Stage> stages;
  for (const auto& s : model.stages()) {
    if (is_core_kind(s.kind)) stages.push_back(s);
  }

  std::vector<FlowArc> flows;
  std::set<std::pair<std::string, std::string>> joined;
  for (const auto& f : model.flows()) {
    if (is_core_kind(model.stage(f.from).kind) && is_core_kind(model.stage(f.to).kind) &&
        joined.emplace(f.from, f.to).second) {
      flows.push_back(f);
    }
  }
  for (const auto& s : stages) {
    for (const auto& t : detail::core_frontier(model, forward, s.id)) {
      if (joined.emplace(s.id, t).second) flows.push_back(FlowArc{s.id + "->" + t, s.id, t, std::nullopt});
    }
  }

  std::vector<TriggerArc> triggers;
  std::set<std::tuple<std::string, std::string, std::optional<std::string>>> seen_triggers;
  for (const auto& t : model.triggers()) {
    auto sources = is_core_kind(model.stage(t.from).kind) ? std::vector<std::string>{t.from}
                                                           : detail::core_frontier(model, backward, t.from);
    auto targets = is_core_kind(model.stage(t.to).kind) ? std::vector<std::string>{t.to}
                                                         : detail::core_frontier(model, forward, t.to);
    bool single = sources.size() == 1 && targets.size() == 1;
    int n = 0;
    for (const auto& from : sources) {
      for (const auto& to : targets) {
        if (!seen_triggers.emplace(from, to, t.guard).second) continue;
        auto id = single ? t.id : t.id + "#" + std::to_string(n++);
        triggers.push_back(TriggerArc{id, from, to, t.guard, t.paper_anchor});
      }
    }
  }

  std::vector<Machine> machines = model.machines();
  for (auto& m : machines) {
    std::erase_if(m.stages, [&](const std::string& id) { return !is_core_kind(model.stage(id).kind); });
  }

  return StaticModel(model.name(), std::move(machines), std::move(stages), model.storages(), std::move(flows),
                     std::move(triggers), ModelMode::simplified);
}

}  // namespace tmw::core
