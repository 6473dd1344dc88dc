#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tmw/core/model.hpp"

namespace tmw::core {

struct Violation {
  enum class Code {
    duplicate_id,
    dangling_reference,
    foreign_storage,
    ownership,
    nesting_cycle,
    self_loop,
    illegal_transition,
    trigger_target,
    ambiguous_fan_out,
    empty_thing_kind,
  };

  Code code;
  std::string subject;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

// Legal flow transitions.
//   within a machine:  transfer->receive, receive->process, receive->release,
//                      create->process, create->release, process->release,
//                      process->process, release->transfer
//   across machines:   transfer->transfer
// Simplified models allow create/process -> process in any machine.
constexpr bool is_legal_flow(StageKind from, StageKind to, bool same_machine,
                             ModelMode mode = ModelMode::strict) noexcept {
  using K = StageKind;
  if (mode == ModelMode::simplified) {
    return is_core_kind(from) && to == K::process;
  }
  if (!same_machine) return from == K::transfer && to == K::transfer;
  switch (from) {
    case K::transfer: return to == K::receive;
    case K::receive: return to == K::process || to == K::release;
    case K::create: return to == K::process || to == K::release;
    case K::process: return to == K::release || to == K::process;
    case K::release: return to == K::transfer;
  }
  return false;
}

constexpr bool is_legal_trigger_target(StageKind to, ModelMode mode = ModelMode::strict) noexcept {
  if (mode == ModelMode::simplified) return is_core_kind(to);
  return to == StageKind::create || to == StageKind::process || to == StageKind::release;
}

// Complete list of well-formedness violations; empty iff the model is valid.
inline ValidationReport validate(const StaticModel& model) {
  ValidationReport report;
  auto add = [&](Violation::Code code, const std::string& subject, std::string message) {
    report.push_back(Violation{code, subject, std::move(message)});
  };

  auto check_unique = [&](const auto& items, const char* what) {
    std::set<std::string, std::less<>> seen;
    for (const auto& item : items) {
      if (!seen.insert(item.id).second) {
        add(Violation::Code::duplicate_id, item.id, std::string("duplicate ") + what + " id '" + item.id + "'");
      }
    }
  };
  check_unique(model.machines(), "machine");
  check_unique(model.stages(), "stage");
  check_unique(model.storages(), "storage");
  {
    // Event regions name arcs of both sorts, so arc ids share one namespace.
    std::set<std::string, std::less<>> arcs;
    for (const auto& f : model.flows()) {
      if (!arcs.insert(f.id).second) add(Violation::Code::duplicate_id, f.id, "duplicate arc id '" + f.id + "'");
    }
    for (const auto& t : model.triggers()) {
      if (!arcs.insert(t.id).second) add(Violation::Code::duplicate_id, t.id, "duplicate arc id '" + t.id + "'");
    }
  }

  for (const auto& m : model.machines()) {
    if (m.parent && !model.find_machine(*m.parent)) {
      add(Violation::Code::dangling_reference, m.id, "machine '" + m.id + "' has unknown parent '" + *m.parent + "'");
    }
    for (const auto& sid : m.stages) {
      const Stage* s = model.find_stage(sid);
      if (!s) {
        add(Violation::Code::dangling_reference, m.id, "machine '" + m.id + "' lists unknown stage '" + sid + "'");
      } else if (s->owner != m.id) {
        add(Violation::Code::ownership, sid, "machine '" + m.id + "' lists stage '" + sid + "' owned by '" + s->owner + "'");
      }
    }
    for (const auto& sid : m.storages) {
      const Storage* s = model.find_storage(sid);
      if (!s) {
        add(Violation::Code::dangling_reference, m.id, "machine '" + m.id + "' lists unknown storage '" + sid + "'");
      } else if (s->owner != m.id) {
        add(Violation::Code::ownership, sid, "machine '" + m.id + "' lists storage '" + sid + "' owned by '" + s->owner + "'");
      }
    }
  }

  // Nesting must form a forest: walking parents from any machine terminates.
  for (const auto& m : model.machines()) {
    std::set<std::string> visited{m.id};
    const Machine* cur = &m;
    while (cur && cur->parent) {
      if (!visited.insert(*cur->parent).second) {
        add(Violation::Code::nesting_cycle, m.id, "machine '" + m.id + "' is part of a nesting cycle");
        break;
      }
      cur = model.find_machine(*cur->parent);
    }
  }

  for (const auto& s : model.stages()) {
    const Machine* owner = model.find_machine(s.owner);
    if (!owner) {
      add(Violation::Code::dangling_reference, s.id, "stage '" + s.id + "' has unknown owner '" + s.owner + "'");
    } else if (std::find(owner->stages.begin(), owner->stages.end(), s.id) == owner->stages.end()) {
      add(Violation::Code::ownership, s.id, "stage '" + s.id + "' is not listed by its owner '" + s.owner + "'");
    }
    if (s.storage) {
      const Storage* st = model.find_storage(*s.storage);
      if (!st) {
        add(Violation::Code::dangling_reference, s.id, "stage '" + s.id + "' uses unknown storage '" + *s.storage + "'");
      } else if (st->owner != s.owner) {
        add(Violation::Code::foreign_storage, s.id,
            "stage '" + s.id + "' uses storage '" + *s.storage + "' of another machine");
      }
    }
  }

  for (const auto& st : model.storages()) {
    if (!model.find_machine(st.owner)) {
      add(Violation::Code::dangling_reference, st.id, "storage '" + st.id + "' has unknown owner '" + st.owner + "'");
    }
    for (const auto& thing : st.content) {
      if (thing.kind.empty()) {
        add(Violation::Code::empty_thing_kind, st.id, "storage '" + st.id + "' holds thing '" + thing.id + "' with empty kind");
      }
    }
  }

  std::map<std::string, int, std::less<>> fan_out;
  for (const auto& f : model.flows()) {
    const Stage* from = model.find_stage(f.from);
    const Stage* to = model.find_stage(f.to);
    if (!from) add(Violation::Code::dangling_reference, f.id, "flow '" + f.id + "' starts at unknown stage '" + f.from + "'");
    if (!to) add(Violation::Code::dangling_reference, f.id, "flow '" + f.id + "' ends at unknown stage '" + f.to + "'");
    if (f.from == f.to) {
      add(Violation::Code::self_loop, f.id, "flow '" + f.id + "' starts and ends at the same stage");
      continue;
    }
    if (!from || !to) continue;
    ++fan_out[f.from];
    bool same = from->owner == to->owner;
    if (!is_legal_flow(from->kind, to->kind, same, model.mode())) {
      add(Violation::Code::illegal_transition, f.id,
          "flow '" + f.id + "' " + std::string(to_string(from->kind)) + "->" + std::string(to_string(to->kind)) +
              (same ? " within a machine" : " across machines") + " is not in the legal-transition table");
    }
  }

  if (model.mode() == ModelMode::strict) {
    for (const auto& [sid, count] : fan_out) {
      const Stage* s = model.find_stage(sid);
      if (count > 1 && s && (s->kind == StageKind::release || s->kind == StageKind::transfer)) {
        add(Violation::Code::ambiguous_fan_out, sid,
            "stage '" + sid + "' (" + std::string(to_string(s->kind)) + ") has " + std::to_string(count) +
                " outgoing flows; only create/process stages may route");
      }
    }
  }

  for (const auto& t : model.triggers()) {
    const Stage* from = model.find_stage(t.from);
    const Stage* to = model.find_stage(t.to);
    if (!from) add(Violation::Code::dangling_reference, t.id, "trigger '" + t.id + "' starts at unknown stage '" + t.from + "'");
    if (!to) {
      add(Violation::Code::dangling_reference, t.id, "trigger '" + t.id + "' ends at unknown stage '" + t.to + "'");
    } else if (!is_legal_trigger_target(to->kind, model.mode())) {
      add(Violation::Code::trigger_target, t.id,
          "trigger '" + t.id + "' targets a " + std::string(to_string(to->kind)) + " stage");
    }
  }
  return report;
}

inline std::string describe(const ValidationReport& report) {
  std::string out;
  for (const auto& v : report) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error("invalid model: " + describe(report)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

inline void require_valid(const StaticModel& model) {
  auto report = validate(model);
  if (!report.empty()) throw ValidationError(std::move(report));
}

}  // namespace tmw::core
