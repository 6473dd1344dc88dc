#pragma once

// Deterministic token-flow execution of a static model.
//
// Per tick, tokens advance one flow arc each in ascending
// (arrived_tick, stage id, thing id) order; arrival at a stage is one action
// and produces one record. Afterwards, trigger arcs leaving every stage that
// acted are evaluated in declaration order; a firing is itself an action and
// may cascade within the same tick.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tmw/core/model.hpp"
#include "tmw/core/validate.hpp"
#include "tmw/error.hpp"

namespace tmw::exec {

using core::Payload;
using core::StageKind;
using core::StaticModel;
using core::Thing;

using Tick = std::int64_t;

struct Token {
  Thing thing;
  std::string at;
  Tick arrived_tick = 0;
  std::optional<std::string> route;  // next stage chosen by the host

  friend bool operator==(const Token&, const Token&) = default;
};

struct ActionRecord {
  Tick tick = 0;
  std::string stage;
  StageKind kind{StageKind::process};
  Thing thing;
  std::optional<std::string> via;  // flow or trigger arc that caused the action

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

using ActionTrace = std::vector<ActionRecord>;

class ExecState;
class EffectContext;

using Effect = std::function<void(EffectContext&)>;
using Guard = std::function<bool(const ExecState&, const Thing&)>;

struct HostBinding {
  std::map<std::string, Guard, std::less<>> guards;
  std::map<std::string, Effect, std::less<>> effects;
};

// Model plus host binding, resolved to indices once and shared by every state.
class Executable {
 public:
  Executable(StaticModel model, HostBinding host) : model_(std::move(model)), host_(std::move(host)) {
    core::require_valid(model_);
    const auto& stages = model_.stages();
    out_flows_.resize(stages.size());
    triggers_from_.resize(stages.size());
    effects_.resize(stages.size(), nullptr);
    for (std::size_t i = 0; i < model_.flows().size(); ++i) {
      out_flows_[*model_.stage_index(model_.flows()[i].from)].push_back(i);
    }
    for (std::size_t i = 0; i < model_.triggers().size(); ++i) {
      const auto& t = model_.triggers()[i];
      triggers_from_[*model_.stage_index(t.from)].push_back(i);
      const Guard* g = nullptr;
      if (t.guard) {
        if (auto it = host_.guards.find(*t.guard); it != host_.guards.end()) g = &it->second;
      }
      guards_.push_back(g);
    }
    for (const auto& [stage_id, effect] : host_.effects) {
      auto idx = model_.stage_index(stage_id);
      if (!idx) throw DefinitionError("effect bound to unknown stage '" + stage_id + "'");
      auto kind = stages[*idx].kind;
      if (kind == StageKind::transfer || kind == StageKind::receive) {
        throw PreconditionError("effect bound to " + std::string(core::to_string(kind)) + " stage '" + stage_id +
                                "'; only create, process and release stages carry effects");
      }
      effects_[*idx] = &effect;
    }
  }

  Executable(const Executable&) = delete;
  Executable& operator=(const Executable&) = delete;

  const StaticModel& model() const noexcept { return model_; }
  const HostBinding& host() const noexcept { return host_; }

 private:
  friend class ExecState;
  friend class EffectContext;
  friend ActionTrace step(ExecState& state);

  StaticModel model_;
  HostBinding host_;
  std::vector<std::vector<std::size_t>> out_flows_;
  std::vector<std::vector<std::size_t>> triggers_from_;
  std::vector<const Effect*> effects_;
  std::vector<const Guard*> guards_;
};

class ExecState {
 public:
  explicit ExecState(std::shared_ptr<const Executable> exe) : exe_(std::move(exe)) {
    for (const auto& st : exe_->model().storages()) storages_.push_back(st.content);
  }

  ExecState(StaticModel model, HostBinding host)
      : ExecState(std::make_shared<const Executable>(std::move(model), std::move(host))) {}

  const StaticModel& model() const noexcept { return exe_->model(); }
  const std::shared_ptr<const Executable>& executable() const noexcept { return exe_; }

  Tick tick() const noexcept { return tick_; }
  bool halted() const noexcept { return halted_; }
  const std::optional<std::string>& fault() const noexcept { return fault_; }
  const std::optional<std::string>& stalled() const noexcept { return stalled_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  bool has_pending_triggers() const noexcept { return !pending_.empty(); }

  // Nothing left to move and no trigger waiting for evaluation.
  bool quiescent() const noexcept { return tokens_.empty() && pending_.empty(); }

  std::vector<Thing>& storage(std::string_view id) { return storages_[storage_index(id)]; }
  const std::vector<Thing>& storage(std::string_view id) const { return storages_[storage_index(id)]; }

  // Fresh thing with a state-unique id.
  Thing make_thing(std::string kind, Payload payload) {
    return Thing{"#" + std::to_string(next_thing_++), std::move(kind), std::move(payload)};
  }

  friend ActionRecord inject(ExecState& state, std::string_view stage_id, Thing thing);
  friend ActionTrace step(ExecState& state);

 private:
  friend class EffectContext;

  struct Pending {
    ActionRecord record;
    std::size_t stage = 0;
    std::size_t next_trigger = 0;
  };

  std::size_t storage_index(std::string_view id) const {
    const auto& list = exe_->model().storages();
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].id == id) return i;
    }
    throw DefinitionError("unknown storage '" + std::string(id) + "'");
  }

  std::shared_ptr<const Executable> exe_;
  std::vector<Token> tokens_;
  std::vector<std::vector<Thing>> storages_;
  std::vector<Pending> pending_;
  Tick tick_ = 0;
  std::uint64_t next_thing_ = 0;
  bool halted_ = false;
  std::optional<std::string> fault_;
  std::optional<std::string> stalled_;
};

// Handed to host effects. Emitted things become tokens at the acting stage.
class EffectContext {
 public:
  EffectContext(ExecState& state, std::size_t stage, const Thing& input, bool triggered, Tick tick)
      : state_(state), stage_(stage), input_(input), triggered_(triggered), tick_(tick) {}

  ExecState& state() noexcept { return state_; }
  const core::Stage& stage() const { return state_.model().stages()[stage_]; }
  const Thing& input() const noexcept { return input_; }
  bool triggered() const noexcept { return triggered_; }
  Tick tick() const noexcept { return tick_; }

  std::vector<Thing>& storage(std::string_view id) { return state_.storage(id); }

  Thing make(std::string kind, Payload payload) { return state_.make_thing(std::move(kind), std::move(payload)); }

  // `next` picks the outgoing flow when the stage has several.
  void emit(Thing thing, std::optional<std::string> next = std::nullopt) {
    outputs_.push_back(Output{std::move(thing), std::move(next)});
  }
  void pass() { emit(input_); }

  void halt() noexcept { halt_ = true; }
  void fault(std::string message) { fault_ = std::move(message); }
  // Declines to act now; the action is retried on the next step.
  void stall(std::string reason) { stall_ = std::move(reason); }

 private:
  friend ActionTrace step(ExecState& state);

  struct Output {
    Thing thing;
    std::optional<std::string> next;
  };

  ExecState& state_;
  std::size_t stage_;
  const Thing& input_;
  bool triggered_;
  Tick tick_;
  std::vector<Output> outputs_;
  bool halt_ = false;
  std::optional<std::string> fault_;
  std::optional<std::string> stall_;
};

// External things enter only at Create or Transfer stages.
inline ActionRecord inject(ExecState& state, std::string_view stage_id, Thing thing) {
  if (state.halted_) throw PreconditionError("cannot inject into a halted state");
  const auto& model = state.model();
  auto idx = model.stage_index(stage_id);
  if (!idx) throw DefinitionError("unknown stage '" + std::string(stage_id) + "'");
  const auto& stage = model.stages()[*idx];
  if (stage.kind != StageKind::create && stage.kind != StageKind::transfer) {
    throw PreconditionError("stage '" + stage.id + "' is not an entry point");
  }
  ActionRecord rec{state.tick_, stage.id, stage.kind, thing, std::nullopt};
  state.tokens_.push_back(Token{std::move(thing), stage.id, state.tick_, std::nullopt});
  state.pending_.push_back(ExecState::Pending{rec, *idx, 0});
  return rec;
}

inline constexpr std::size_t max_firings_per_tick = 100000;

inline ActionTrace step(ExecState& state) {
  if (state.halted_) throw PreconditionError("state is halted");
  if (state.fault_) throw PreconditionError("state is faulted: " + *state.fault_);
  state.stalled_.reset();

  const Executable& exe = *state.exe_;
  const auto& model = exe.model();
  const auto& stages = model.stages();
  const Tick now = state.tick_ + 1;
  ActionTrace records;
  bool halt = false;

  std::vector<ExecState::Pending> queue = std::move(state.pending_);
  state.pending_.clear();

  auto place = [&](std::size_t at, EffectContext& ctx, std::vector<Token>& into) {
    for (auto& out : ctx.outputs_) {
      if (out.next) {
        bool linked = false;
        for (auto f : exe.out_flows_[at]) linked |= model.flows()[f].to == *out.next;
        if (!linked) {
          throw ExecutionFault("stage '" + stages[at].id + "' has no flow to '" + *out.next + "'");
        }
      }
      into.push_back(Token{std::move(out.thing), stages[at].id, now, std::move(out.next)});
    }
  };

  auto act = [&](std::size_t at, const Thing& input, bool triggered, const std::optional<std::string>& via,
                 std::vector<Token>& into) -> bool {
    EffectContext ctx(state, at, input, triggered, now);
    if (const Effect* effect = exe.effects_[at]) {
      (*effect)(ctx);
    } else if (!triggered) {
      ctx.pass();
    }
    if (ctx.stall_) {
      state.stalled_ = std::move(ctx.stall_);
      return false;
    }
    const Thing& shown = (triggered && !ctx.outputs_.empty()) ? ctx.outputs_.front().thing : input;
    ActionRecord rec{now, stages[at].id, stages[at].kind, shown, via};
    records.push_back(rec);
    queue.push_back(ExecState::Pending{std::move(rec), at, 0});
    place(at, ctx, into);
    halt |= ctx.halt_;
    if (ctx.fault_ && !state.fault_) state.fault_ = std::move(ctx.fault_);
    return true;
  };

  std::vector<Token> moving = std::move(state.tokens_);
  state.tokens_.clear();
  std::sort(moving.begin(), moving.end(), [](const Token& a, const Token& b) {
    return std::tie(a.arrived_tick, a.at, a.thing.id) < std::tie(b.arrived_tick, b.at, b.thing.id);
  });

  std::vector<Token> next;
  for (auto& token : moving) {
    if (state.fault_) {
      next.push_back(std::move(token));
      continue;
    }
    std::size_t at = *model.stage_index(token.at);
    const auto& outs = exe.out_flows_[at];
    const core::FlowArc* arc = nullptr;
    if (token.route) {
      for (auto f : outs) {
        if (model.flows()[f].to == *token.route) arc = &model.flows()[f];
      }
    } else if (outs.size() == 1) {
      arc = &model.flows()[outs.front()];
    } else if (outs.size() > 1) {
      throw ExecutionFault("ambiguous fan-out at stage '" + token.at + "' for thing '" + token.thing.id + "'");
    }
    if (!arc) continue;  // sink: the token leaves the model

    std::size_t dest = *model.stage_index(arc->to);
    if (!act(dest, token.thing, false, arc->id, next)) next.push_back(std::move(token));
  }

  std::size_t firings = 0;
  std::size_t head = 0;
  for (; head < queue.size() && !state.fault_; ) {
    auto& p = queue[head];
    const auto& trigs = exe.triggers_from_[p.stage];
    if (p.next_trigger >= trigs.size()) {
      ++head;
      continue;
    }
    std::size_t ti = trigs[p.next_trigger];
    const auto& trig = model.triggers()[ti];
    if (trig.guard) {
      const Guard* guard = exe.guards_[ti];
      if (!guard) throw ExecutionFault("unbound guard '" + *trig.guard + "' on trigger '" + trig.id + "'");
      if (!(*guard)(state, p.record.thing)) {
        ++p.next_trigger;
        continue;
      }
    }
    // `act` may grow the queue, so work from copies.
    Thing source = p.record.thing;
    std::size_t target = *model.stage_index(trig.to);
    if (!act(target, source, true, trig.id, next)) break;
    ++queue[head].next_trigger;
    if (++firings > max_firings_per_tick) {
      throw ExecutionFault("trigger cascade exceeded " + std::to_string(max_firings_per_tick) + " firings in one tick");
    }
  }

  if (state.stalled_) state.pending_.assign(std::make_move_iterator(queue.begin() + static_cast<std::ptrdiff_t>(head)),
                                            std::make_move_iterator(queue.end()));
  state.tokens_ = std::move(next);
  if (!records.empty()) state.tick_ = now;
  if (halt) state.halted_ = true;
  return records;
}

// Steps until quiescence, halt, fault, stall or `max_ticks` steps.
inline ActionTrace run(ExecState& state, Tick max_ticks) {
  if (max_ticks < 0) throw PreconditionError("max_ticks must be non-negative");
  ActionTrace trace;
  for (Tick i = 0; i < max_ticks; ++i) {
    if (state.halted() || state.fault() || state.quiescent()) break;
    auto records = step(state);
    trace.insert(trace.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
    if (state.stalled()) break;
  }
  return trace;
}

}  // namespace tmw::exec
