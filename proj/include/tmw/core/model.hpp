#pragma once

// Thinging machine (TM) metamodel: machines own stages and storages, flow arcs
// move things between stages, trigger arcs start activity elsewhere.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tmw/error.hpp"

namespace tmw::core {

enum class StageKind { create, process, release, transfer, receive };

inline constexpr std::array<StageKind, 5> all_stage_kinds = {
    StageKind::create, StageKind::process, StageKind::release, StageKind::transfer,
    StageKind::receive};

constexpr std::string_view to_string(StageKind kind) noexcept {
  switch (kind) {
    case StageKind::create: return "create";
    case StageKind::process: return "process";
    case StageKind::release: return "release";
    case StageKind::transfer: return "transfer";
    case StageKind::receive: return "receive";
  }
  return "?";
}

inline std::optional<StageKind> parse_stage_kind(std::string_view text) noexcept {
  for (auto kind : all_stage_kinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

// Create and Process are the stages that survive simplification.
constexpr bool is_core_kind(StageKind kind) noexcept {
  return kind == StageKind::create || kind == StageKind::process;
}

using Payload = std::variant<std::int64_t, std::string>;

struct Thing {
  std::string id;
  std::string kind;
  Payload payload{std::int64_t{0}};

  std::int64_t number() const {
    if (auto* n = std::get_if<std::int64_t>(&payload)) return *n;
    throw ExecutionFault("thing '" + id + "' carries text, not a number");
  }

  friend bool operator==(const Thing&, const Thing&) = default;
};

struct Stage {
  std::string id;
  StageKind kind{StageKind::process};
  std::string owner;
  std::optional<std::string> storage;
  std::optional<std::string> paper_anchor;

  friend bool operator==(const Stage&, const Stage&) = default;
};

struct Machine {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  std::vector<std::string> stages;
  std::vector<std::string> storages;

  friend bool operator==(const Machine&, const Machine&) = default;
};

struct Storage {
  std::string id;
  std::string owner;
  std::vector<Thing> content;

  friend bool operator==(const Storage&, const Storage&) = default;
};

struct FlowArc {
  std::string id;
  std::string from;
  std::string to;
  std::optional<std::string> paper_anchor;

  friend bool operator==(const FlowArc&, const FlowArc&) = default;
};

struct TriggerArc {
  std::string id;
  std::string from;
  std::string to;
  std::optional<std::string> guard;
  std::optional<std::string> paper_anchor;

  friend bool operator==(const TriggerArc&, const TriggerArc&) = default;
};

// Simplified models drop Release/Transfer/Receive and relax the transition rules.
enum class ModelMode { strict, simplified };

class StaticModel {
 public:
  StaticModel() = default;

  StaticModel(std::string name, std::vector<Machine> machines, std::vector<Stage> stages,
              std::vector<Storage> storages, std::vector<FlowArc> flows,
              std::vector<TriggerArc> triggers, ModelMode mode = ModelMode::strict)
      : name_(std::move(name)),
        mode_(mode),
        machines_(std::move(machines)),
        stages_(std::move(stages)),
        storages_(std::move(storages)),
        flows_(std::move(flows)),
        triggers_(std::move(triggers)) {
    reindex();
  }

  const std::string& name() const noexcept { return name_; }
  ModelMode mode() const noexcept { return mode_; }
  const std::vector<Machine>& machines() const noexcept { return machines_; }
  const std::vector<Stage>& stages() const noexcept { return stages_; }
  const std::vector<Storage>& storages() const noexcept { return storages_; }
  const std::vector<FlowArc>& flows() const noexcept { return flows_; }
  const std::vector<TriggerArc>& triggers() const noexcept { return triggers_; }

  const Machine* find_machine(std::string_view id) const { return find(machines_, machine_index_, id); }
  const Stage* find_stage(std::string_view id) const { return find(stages_, stage_index_, id); }
  const Storage* find_storage(std::string_view id) const { return find(storages_, storage_index_, id); }
  const FlowArc* find_flow(std::string_view id) const { return find(flows_, flow_index_, id); }
  const TriggerArc* find_trigger(std::string_view id) const { return find(triggers_, trigger_index_, id); }

  std::optional<std::size_t> stage_index(std::string_view id) const {
    auto it = stage_index_.find(id);
    if (it == stage_index_.end()) return std::nullopt;
    return it->second;
  }

  const Stage& stage(std::string_view id) const {
    if (auto* s = find_stage(id)) return *s;
    throw DefinitionError("unknown stage '" + std::string(id) + "'");
  }

  friend bool operator==(const StaticModel& a, const StaticModel& b) {
    return a.name_ == b.name_ && a.mode_ == b.mode_ && a.machines_ == b.machines_ &&
           a.stages_ == b.stages_ && a.storages_ == b.storages_ && a.flows_ == b.flows_ &&
           a.triggers_ == b.triggers_;
  }

 private:
  using Index = std::map<std::string, std::size_t, std::less<>>;

  template <typename T>
  static const T* find(const std::vector<T>& items, const Index& index, std::string_view id) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &items[it->second];
  }

  template <typename T>
  static void build(const std::vector<T>& items, Index& index) {
    index.clear();
    // First occurrence wins; duplicates are reported by validate().
    for (std::size_t i = 0; i < items.size(); ++i) index.emplace(items[i].id, i);
  }

  void reindex() {
    build(machines_, machine_index_);
    build(stages_, stage_index_);
    build(storages_, storage_index_);
    build(flows_, flow_index_);
    build(triggers_, trigger_index_);
  }

  std::string name_;
  ModelMode mode_{ModelMode::strict};
  std::vector<Machine> machines_;
  std::vector<Stage> stages_;
  std::vector<Storage> storages_;
  std::vector<FlowArc> flows_;
  std::vector<TriggerArc> triggers_;
  Index machine_index_, stage_index_, storage_index_, flow_index_, trigger_index_;
};

// Incremental construction in declaration order. Stages and storages are
// appended to their owner's lists automatically.
class ModelBuilder {
 public:
  explicit ModelBuilder(std::string name) : name_(std::move(name)) {}

  ModelBuilder& machine(std::string id, std::string name,
                        std::optional<std::string> parent = std::nullopt) {
    machines_.push_back(Machine{std::move(id), std::move(name), std::move(parent), {}, {}});
    return *this;
  }

  ModelBuilder& storage(std::string id, const std::string& owner, std::vector<Thing> content = {}) {
    if (auto* m = machine_ptr(owner)) m->storages.push_back(id);
    storages_.push_back(Storage{std::move(id), owner, std::move(content)});
    return *this;
  }

  ModelBuilder& stage(std::string id, StageKind kind, const std::string& owner,
                      std::optional<std::string> anchor = std::nullopt,
                      std::optional<std::string> storage = std::nullopt) {
    if (auto* m = machine_ptr(owner)) m->stages.push_back(id);
    stages_.push_back(Stage{std::move(id), kind, owner, std::move(storage), std::move(anchor)});
    return *this;
  }

  // Flow arc ids default to "from->to".
  ModelBuilder& flow(const std::string& from, const std::string& to,
                     std::optional<std::string> anchor = std::nullopt) {
    flows_.push_back(FlowArc{from + "->" + to, from, to, std::move(anchor)});
    return *this;
  }

  // Builds a linear chain of flow arcs through the listed stages.
  ModelBuilder& chain(std::initializer_list<std::string> stages) {
    const std::string* prev = nullptr;
    for (const auto& s : stages) {
      if (prev) flow(*prev, s);
      prev = &s;
    }
    return *this;
  }

  ModelBuilder& trigger(std::string id, const std::string& from, const std::string& to,
                        std::optional<std::string> guard = std::nullopt,
                        std::optional<std::string> anchor = std::nullopt) {
    triggers_.push_back(TriggerArc{std::move(id), from, to, std::move(guard), std::move(anchor)});
    return *this;
  }

  StaticModel build(ModelMode mode = ModelMode::strict) const {
    return StaticModel(name_, machines_, stages_, storages_, flows_, triggers_, mode);
  }

 private:
  Machine* machine_ptr(const std::string& id) {
    for (auto& m : machines_) {
      if (m.id == id) return &m;
    }
    return nullptr;
  }

  std::string name_;
  std::vector<Machine> machines_;
  std::vector<Stage> stages_;
  std::vector<Storage> storages_;
  std::vector<FlowArc> flows_;
  std::vector<TriggerArc> triggers_;
};

}  // namespace tmw::core
