#pragma once

// JSON and Graphviz DOT serialization of static models.

#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tmw/core/model.hpp"
#include "tmw/core/validate.hpp"

namespace tmw::core {

using nlohmann::json;

enum class ExportFormat { dot, json };

namespace detail {

// Converts a byte offset into 1-based line/column for parse diagnostics.
inline std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

inline std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline json thing_to_json(const Thing& thing) {
  json j{{"id", thing.id}, {"kind", thing.kind}};
  std::visit([&](const auto& v) { j["payload"] = v; }, thing.payload);
  return j;
}

inline Thing thing_from_json(const json& j) {
  Thing t{j.at("id").get<std::string>(), j.at("kind").get<std::string>(), std::int64_t{0}};
  const auto& p = j.at("payload");
  if (p.is_number_integer()) {
    t.payload = p.get<std::int64_t>();
  } else if (p.is_string()) {
    t.payload = p.get<std::string>();
  } else {
    throw SchemaError("thing '" + t.id + "': payload must be an integer or text");
  }
  return t;
}

inline json model_to_json(const StaticModel& model) {
  json j;
  j["name"] = model.name();
  j["mode"] = model.mode() == ModelMode::strict ? "strict" : "simplified";
  j["machines"] = json::array();
  for (const auto& m : model.machines()) {
    json jm{{"id", m.id}, {"name", m.name}, {"stages", m.stages}, {"storages", m.storages}};
    detail::put_optional(jm, "parent", m.parent);
    j["machines"].push_back(std::move(jm));
  }
  j["stages"] = json::array();
  for (const auto& s : model.stages()) {
    json js{{"id", s.id}, {"kind", std::string(to_string(s.kind))}, {"owner", s.owner}};
    detail::put_optional(js, "storage", s.storage);
    detail::put_optional(js, "paper_anchor", s.paper_anchor);
    j["stages"].push_back(std::move(js));
  }
  j["storages"] = json::array();
  for (const auto& st : model.storages()) {
    json content = json::array();
    for (const auto& t : st.content) content.push_back(thing_to_json(t));
    j["storages"].push_back(json{{"id", st.id}, {"owner", st.owner}, {"content", std::move(content)}});
  }
  j["flows"] = json::array();
  for (const auto& f : model.flows()) {
    json jf{{"id", f.id}, {"from", f.from}, {"to", f.to}};
    detail::put_optional(jf, "paper_anchor", f.paper_anchor);
    j["flows"].push_back(std::move(jf));
  }
  j["triggers"] = json::array();
  for (const auto& t : model.triggers()) {
    json jt{{"id", t.id}, {"from", t.from}, {"to", t.to}};
    detail::put_optional(jt, "guard", t.guard);
    detail::put_optional(jt, "paper_anchor", t.paper_anchor);
    j["triggers"].push_back(std::move(jt));
  }
  return j;
}

// Structural conversion; the result is not validated.
inline StaticModel model_from_json(const json& j) {
  auto array = [&](const char* key) -> const json& {
    static const json empty = json::array();
    auto it = j.find(key);
    if (it == j.end()) return empty;
    if (!it->is_array()) throw SchemaError(std::string("'") + key + "' must be an array");
    return *it;
  };
  if (!j.is_object()) throw SchemaError("model document must be a JSON object");
  try {
    ModelMode mode = ModelMode::strict;
    if (auto m = detail::get_optional<std::string>(j, "mode")) {
      if (*m == "simplified") {
        mode = ModelMode::simplified;
      } else if (*m != "strict") {
        throw SchemaError("unknown model mode '" + *m + "'");
      }
    }

    std::vector<Stage> stages;
    for (const auto& js : array("stages")) {
      auto kind_text = js.at("kind").get<std::string>();
      auto kind = parse_stage_kind(kind_text);
      if (!kind) {
        throw SchemaError("stage '" + js.at("id").get<std::string>() + "': unknown stage kind '" + kind_text +
                          "' (expected create, process, release, transfer or receive)");
      }
      stages.push_back(Stage{js.at("id").get<std::string>(), *kind, js.at("owner").get<std::string>(),
                             detail::get_optional<std::string>(js, "storage"),
                             detail::get_optional<std::string>(js, "paper_anchor")});
    }

    std::vector<Storage> storages;
    for (const auto& jst : array("storages")) {
      Storage st{jst.at("id").get<std::string>(), jst.at("owner").get<std::string>(), {}};
      if (auto it = jst.find("content"); it != jst.end()) {
        for (const auto& t : *it) st.content.push_back(thing_from_json(t));
      }
      storages.push_back(std::move(st));
    }

    std::vector<Machine> machines;
    for (const auto& jm : array("machines")) {
      Machine m{jm.at("id").get<std::string>(), jm.value("name", std::string{}),
                detail::get_optional<std::string>(jm, "parent"), {}, {}};
      if (jm.contains("stages")) {
        m.stages = jm.at("stages").get<std::vector<std::string>>();
      } else {
        for (const auto& s : stages) {
          if (s.owner == m.id) m.stages.push_back(s.id);
        }
      }
      if (jm.contains("storages")) {
        m.storages = jm.at("storages").get<std::vector<std::string>>();
      } else {
        for (const auto& s : storages) {
          if (s.owner == m.id) m.storages.push_back(s.id);
        }
      }
      machines.push_back(std::move(m));
    }

    std::vector<FlowArc> flows;
    for (const auto& jf : array("flows")) {
      flows.push_back(FlowArc{jf.at("id").get<std::string>(), jf.at("from").get<std::string>(),
                              jf.at("to").get<std::string>(), detail::get_optional<std::string>(jf, "paper_anchor")});
    }
    std::vector<TriggerArc> triggers;
    for (const auto& jt : array("triggers")) {
      triggers.push_back(TriggerArc{jt.at("id").get<std::string>(), jt.at("from").get<std::string>(),
                                    jt.at("to").get<std::string>(), detail::get_optional<std::string>(jt, "guard"),
                                    detail::get_optional<std::string>(jt, "paper_anchor")});
    }
    return StaticModel(j.value("name", std::string{}), std::move(machines), std::move(stages), std::move(storages),
                       std::move(flows), std::move(triggers), mode);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model schema: ") + e.what());
  }
}

// Parses JSON text, reporting syntax errors with line and column.
inline json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, column] = detail::locate(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + e.what(),
                     line, column);
  }
}

inline StaticModel import_model(std::string_view text) { return model_from_json(parse_json_text(text)); }

inline std::string to_dot(const StaticModel& model) {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(model.name()) << " {\n";
  if (model.machines().empty() && model.stages().empty()) {
    os << "}\n";
    return os.str();
  }
  os << "  compound=true;\n  node [shape=box, style=rounded];\n";

  std::map<std::string, std::vector<const Machine*>, std::less<>> children;
  std::vector<const Machine*> roots;
  for (const auto& m : model.machines()) {
    if (m.parent && model.find_machine(*m.parent)) {
      children[*m.parent].push_back(&m);
    } else {
      roots.push_back(&m);
    }
  }

  auto emit_machine = [&](auto& self, const Machine& m, int depth) -> void {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    os << pad << "subgraph " << detail::dot_quote("cluster_" + m.id) << " {\n";
    os << pad << "  label=" << detail::dot_quote(m.name.empty() ? m.id : m.name) << ";\n";
    for (const auto& sid : m.stages) {
      const Stage* s = model.find_stage(sid);
      if (!s) continue;
      std::string label = std::string(to_string(s->kind)) + "\n" + s->id;
      if (s->paper_anchor) label += "\n(" + *s->paper_anchor + ")";
      os << pad << "  " << detail::dot_quote(s->id) << " [label=" << detail::dot_quote(label) << "];\n";
    }
    for (const auto& st : m.storages) {
      os << pad << "  " << detail::dot_quote(st) << " [shape=cylinder, style=solid, label=" << detail::dot_quote(st)
         << "];\n";
    }
    if (auto it = children.find(m.id); it != children.end()) {
      for (const auto* c : it->second) self(self, *c, depth + 1);
    }
    os << pad << "}\n";
  };
  for (const auto* m : roots) emit_machine(emit_machine, *m, 1);

  for (const auto& s : model.stages()) {
    if (s.storage) {
      os << "  " << detail::dot_quote(s.id) << " -> " << detail::dot_quote(*s.storage)
         << " [style=dotted, arrowhead=none];\n";
    }
  }
  for (const auto& f : model.flows()) {
    os << "  " << detail::dot_quote(f.from) << " -> " << detail::dot_quote(f.to);
    if (f.paper_anchor) os << " [xlabel=" << detail::dot_quote(*f.paper_anchor) << "]";
    os << ";\n";
  }
  for (const auto& t : model.triggers()) {
    os << "  " << detail::dot_quote(t.from) << " -> " << detail::dot_quote(t.to) << " [style=dashed";
    std::string label = t.guard.value_or("");
    if (t.paper_anchor) label += (label.empty() ? "" : " ") + ("(" + *t.paper_anchor + ")");
    if (!label.empty()) os << ", label=" << detail::dot_quote(label);
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

inline std::string export_model(const StaticModel& model, ExportFormat format) {
  require_valid(model);
  if (format == ExportFormat::dot) return to_dot(model);
  return model_to_json(model).dump(2) + "\n";
}

}  // namespace tmw::core
