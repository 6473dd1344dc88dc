#pragma once

#include <nlohmann/json.hpp>

#include "tmw/core/io.hpp"
#include "tmw/exec/engine.hpp"

namespace tmw::exec {

using nlohmann::json;

// Records optionally carry the stage's paper_anchor when a model is supplied.
inline json record_to_json(const ActionRecord& r, const StaticModel* model = nullptr) {
  json j{{"tick", r.tick},
         {"stage", r.stage},
         {"kind", std::string(core::to_string(r.kind))},
         {"thing", core::thing_to_json(r.thing)}};
  if (r.via) j["via"] = *r.via;
  if (model) {
    if (const auto* s = model->find_stage(r.stage); s && s->paper_anchor) j["paper_anchor"] = *s->paper_anchor;
  }
  return j;
}

inline json trace_to_json(const ActionTrace& trace, const StaticModel* model = nullptr) {
  json j = json::array();
  for (const auto& r : trace) j.push_back(record_to_json(r, model));
  return j;
}

inline ActionRecord record_from_json(const json& j) {
  try {
    auto kind_text = j.at("kind").get<std::string>();
    auto kind = core::parse_stage_kind(kind_text);
    if (!kind) throw SchemaError("unknown stage kind '" + kind_text + "'");
    ActionRecord r{j.at("tick").get<Tick>(), j.at("stage").get<std::string>(), *kind,
                   core::thing_from_json(j.at("thing")), std::nullopt};
    if (auto it = j.find("via"); it != j.end()) r.via = it->get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("trace schema: ") + e.what());
  }
}

inline ActionTrace trace_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("trace document must be a JSON array");
  ActionTrace trace;
  for (const auto& r : j) trace.push_back(record_from_json(r));
  return trace;
}

}  // namespace tmw::exec
