#pragma once

// Runs LMC programs on the TM engine. The host binding below supplies the
// effects and guards of the LMC model; the architectural state lives in the
// model's storages and is read back into an LmcState after each instruction.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmw/events/events.hpp"
#include "tmw/exec/engine.hpp"
#include "tmw/lmc/machine.hpp"
#include "tmw/lmc/tm_model.hpp"

namespace tmw::lmc {

using core::Thing;
using exec::EffectContext;
using exec::ExecState;

namespace detail {

inline Thing& slot(std::vector<Thing>& store, const char* id, const char* kind) {
  if (store.empty()) store.push_back(Thing{id, kind, std::int64_t{0}});
  return store.front();
}

inline int num(const Thing& t) { return static_cast<int>(t.number()); }

inline int reg(EffectContext& ctx) { return num(slot(ctx.storage(storage::address_register), "reg", "address")); }

inline Thing& acc(EffectContext& ctx) { return slot(ctx.storage(storage::value), "acc", "data"); }

inline Thing& flag(EffectContext& ctx) { return slot(ctx.storage(storage::flag), "flag", "flag"); }

inline void set_value(EffectContext& ctx, int value, bool negative) {
  acc(ctx).payload = std::int64_t{value};
  flag(ctx).payload = std::int64_t{negative ? 1 : 0};
}

// Emits an address taken from the register under the given kind.
inline exec::Effect forward_register(const char* kind) {
  return [kind](EffectContext& ctx) { ctx.emit(ctx.make(kind, std::int64_t{reg(ctx)})); };
}

}  // namespace detail

inline exec::HostBinding lmc_host_binding() {
  using namespace detail;
  exec::HostBinding h;
  auto& fx = h.effects;

  fx["pc.reset"] = [](EffectContext& ctx) {
    slot(ctx.storage(storage::pc), "pc", "address").payload = std::int64_t{num(ctx.input())};
  };
  fx["pc.read"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("fetch-address", std::int64_t{num(slot(ctx.storage(storage::pc), "pc", "address"))}));
  };
  fx["pc.increment"] = [](EffectContext& ctx) {
    auto& pc = slot(ctx.storage(storage::pc), "pc", "address");
    pc.payload = std::int64_t{(num(pc) + 1) % mailbox_count};
    ctx.pass();
  };
  fx["pc.route"] = [](EffectContext& ctx) {
    ctx.emit(ctx.input(), ctx.input().kind == "load-address" ? "pc.route_release" : "pc.write");
  };
  fx["pc.write"] = [](EffectContext& ctx) {
    slot(ctx.storage(storage::pc), "pc", "address").payload = std::int64_t{num(ctx.input())};
  };

  fx["memory.lookup"] = [](EffectContext& ctx) {
    const auto& in = ctx.input();
    int addr = num(in);
    if (!is_address(addr)) {
      ctx.fault("mailbox address " + std::to_string(addr) + " out of range");
      return;
    }
    int cell = num(ctx.storage(storage::mailboxes).at(static_cast<std::size_t>(addr)));
    struct Route {
      const char* from;
      const char* kind;
      const char* next;
    };
    static constexpr Route routes[] = {{"fetch-address", "instruction", "memory.release_instruction"},
                                       {"add-address", "add-operand", "memory.release_add"},
                                       {"sub-address", "sub-operand", "memory.release_sub"},
                                       {"load-address", "load-value", "memory.release_load"}};
    for (const auto& r : routes) {
      if (in.kind == r.from) {
        ctx.emit(ctx.make(r.kind, std::int64_t{cell}), r.next);
        return;
      }
    }
    ctx.fault("memory cannot serve a '" + in.kind + "'");
  };
  fx["memory.store_join"] = [](EffectContext& ctx) { ctx.storage(storage::store_buffer).push_back(ctx.input()); };
  fx["memory.store"] = [](EffectContext& ctx) {
    auto& buffer = ctx.storage(storage::store_buffer);
    std::optional<int> addr, value;
    for (const auto& t : buffer) {
      if (t.kind == "store-address") addr = num(t);
      if (t.kind == "store-value") value = num(t);
    }
    buffer.clear();
    if (!addr || !value) {
      ctx.fault("store without both address and value");
      return;
    }
    ctx.storage(storage::mailboxes).at(static_cast<std::size_t>(*addr)).payload = std::int64_t{*value};
  };

  fx["decode.decode"] = [](EffectContext& ctx) {
    auto [op, addr] = decode(num(ctx.input()));
    ctx.emit(ctx.make("opcode", std::int64_t{op}), "decode.release_opcode");
    ctx.emit(ctx.make("address", std::int64_t{addr}), "decode.release_address");
  };

  fx["dispatch.opcode"] = [](EffectContext&) {};
  fx["dispatch.hold_address"] = [](EffectContext& ctx) {
    slot(ctx.storage(storage::address_register), "reg", "address").payload = std::int64_t{num(ctx.input())};
  };
  fx["dispatch.halt"] = [](EffectContext& ctx) { ctx.halt(); };
  fx["dispatch.add"] = forward_register("add-address");
  fx["dispatch.subtract"] = forward_register("sub-address");
  fx["dispatch.store"] = forward_register("store-address");
  fx["dispatch.invalid"] = [](EffectContext& ctx) { ctx.fault("opcode 4 is not an instruction"); };
  fx["dispatch.load"] = forward_register("load-address");
  fx["dispatch.branch"] = forward_register("branch-address");
  fx["dispatch.take_branch"] = forward_register("branch-address");
  fx["dispatch.examine_address"] = [](EffectContext& ctx) {
    int a = reg(ctx);
    ctx.emit(ctx.make("io-address", std::int64_t{a}));
    if (a != 1 && a != 2) ctx.fault("I/O address " + std::to_string(a) + " is neither 01 nor 02");
  };

  fx["calc.add"] = [](EffectContext& ctx) {
    auto& v = acc(ctx);
    v.payload = std::int64_t{(num(v) + num(ctx.input())) % cell_modulus};
  };
  fx["calc.subtract"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("difference", std::int64_t{num(acc(ctx)) - num(ctx.input())}));
  };
  fx["calc.examine"] = [](EffectContext&) {};
  fx["calc.store_difference"] = [](EffectContext& ctx) { set_value(ctx, num(ctx.input()), false); };
  fx["calc.set_negative"] = [](EffectContext& ctx) { set_value(ctx, num(ctx.input()) + cell_modulus, true); };
  fx["calc.load"] = [](EffectContext& ctx) { set_value(ctx, num(ctx.input()), false); };
  fx["calc.test_zero"] = [](EffectContext& ctx) { ctx.emit(ctx.make("calc-value", std::int64_t{num(acc(ctx))})); };
  fx["calc.test_flag"] = [](EffectContext& ctx) { ctx.emit(ctx.make("flag", std::int64_t{num(flag(ctx))})); };
  fx["calc.set_from_input"] = [](EffectContext& ctx) { set_value(ctx, num(ctx.input()), false); };
  fx["calc.release_output"] = [](EffectContext& ctx) { ctx.emit(ctx.make("data", std::int64_t{num(acc(ctx))})); };
  fx["calc.release_store"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("store-value", std::int64_t{num(acc(ctx))}));
  };

  fx["input.take"] = [](EffectContext& ctx) {
    auto& tray = ctx.storage(storage::input);
    if (tray.empty()) {
      ctx.stall("input tray is empty");
      return;
    }
    ctx.emit(tray.front());
    tray.erase(tray.begin());
  };
  fx["output.append"] = [](EffectContext& ctx) { ctx.storage(storage::output).push_back(ctx.input()); };

  auto& g = h.guards;
  for (int op = 0; op < 10; ++op) {
    g["opcode=" + std::to_string(op)] = [op](const ExecState&, const Thing& t) { return t.number() == op; };
  }
  g["d≥0"] = [](const ExecState&, const Thing& t) { return t.number() >= 0; };
  g["d<0"] = [](const ExecState&, const Thing& t) { return t.number() < 0; };
  g["value=0"] = [](const ExecState&, const Thing& t) { return t.number() == 0; };
  g["flag clear"] = [](const ExecState&, const Thing& t) { return t.number() == 0; };
  g["addr=01"] = [](const ExecState&, const Thing& t) { return t.number() == 1; };
  g["addr=02"] = [](const ExecState&, const Thing& t) { return t.number() == 2; };
  g["store ready"] = [](const ExecState& s, const Thing&) {
    bool addr = false, value = false;
    for (const auto& t : s.storage(storage::store_buffer)) {
      addr |= t.kind == "store-address";
      value |= t.kind == "store-value";
    }
    return addr && value;
  };
  return h;
}

inline std::shared_ptr<const exec::Executable> lmc_executable() {
  static const auto exe = std::make_shared<const exec::Executable>(lmc_static_model(), lmc_host_binding());
  return exe;
}

inline void load_storages(ExecState& s, const LmcState& lmc) {
  auto& boxes = s.storage(storage::mailboxes);
  boxes.clear();
  for (int i = 0; i < mailbox_count; ++i) {
    std::string id = (i < 10 ? "m0" : "m") + std::to_string(i);
    boxes.push_back(Thing{id, "cell", std::int64_t{lmc.mailboxes[static_cast<std::size_t>(i)]}});
  }
  s.storage(storage::pc) = {Thing{"pc", "address", std::int64_t{lmc.pc}}};
  s.storage(storage::value) = {Thing{"acc", "data", std::int64_t{lmc.calculator.value}}};
  s.storage(storage::flag) = {Thing{"flag", "flag", std::int64_t{lmc.calculator.negative ? 1 : 0}}};
  s.storage(storage::address_register) = {Thing{"reg", "address", std::int64_t{0}}};
  s.storage(storage::store_buffer).clear();
  auto& in = s.storage(storage::input);
  in.clear();
  for (std::size_t i = 0; i < lmc.trays.input.size(); ++i) {
    in.push_back(Thing{"in" + std::to_string(i), "data", std::int64_t{lmc.trays.input[i]}});
  }
  auto& out = s.storage(storage::output);
  out.clear();
  for (std::size_t i = 0; i < lmc.trays.output.size(); ++i) {
    out.push_back(Thing{"out" + std::to_string(i), "data", std::int64_t{lmc.trays.output[i]}});
  }
}

inline LmcState read_storages(const ExecState& s) {
  auto first = [&](const char* id) {
    const auto& v = s.storage(id);
    return v.empty() ? 0 : static_cast<int>(v.front().number());
  };
  LmcState out;
  const auto& boxes = s.storage(storage::mailboxes);
  for (std::size_t i = 0; i < boxes.size() && i < out.mailboxes.size(); ++i) {
    out.mailboxes[i] = static_cast<int>(boxes[i].number());
  }
  out.pc = first(storage::pc);
  out.calculator.value = first(storage::value);
  out.calculator.negative = first(storage::flag) != 0;
  for (const auto& t : s.storage(storage::input)) out.trays.input.push_back(static_cast<int>(t.number()));
  for (const auto& t : s.storage(storage::output)) out.trays.output.push_back(static_cast<int>(t.number()));
  out.halted = s.halted();
  return out;
}

enum class StepStatus { completed, halted, awaiting_input, faulted, tick_limit };

inline const char* to_string(StepStatus s) noexcept {
  switch (s) {
    case StepStatus::completed: return "completed";
    case StepStatus::halted: return "halted";
    case StepStatus::awaiting_input: return "awaiting_input";
    case StepStatus::faulted: return "faulted";
    case StepStatus::tick_limit: return "tick_limit";
  }
  return "?";
}

struct StepResult {
  StepStatus status = StepStatus::completed;
  exec::ActionTrace records;
  std::vector<events::EventOccurrence> occurrences;
  std::optional<std::string> fault;
};

class TmMachine {
 public:
  static constexpr exec::Tick default_tick_budget = 1000;

  explicit TmMachine(const LmcState& initial, StarvationPolicy policy = StarvationPolicy::pause)
      : exec_(lmc_executable()), detector_(lmc_event_defs()), policy_(policy) {
    load_storages(exec_, initial);
    auto first = exec::inject(exec_, stage::reset_entry, exec_.make_thing("data", std::int64_t{0}));
    exec::ActionTrace records{first};
    auto rest = exec::run(exec_, default_tick_budget);
    records.insert(records.end(), rest.begin(), rest.end());
    absorb(records);
    awaiting_ = initial.awaiting_input;
  }

  // Executes one instruction as a sequence of TM actions.
  StepResult step_instruction(exec::Tick tick_budget = default_tick_budget) {
    if (exec_.halted()) throw PreconditionError("machine is halted");
    if (fault_) throw PreconditionError("machine is faulted: " + *fault_);

    const ExecState checkpoint = exec_;
    const EventDetector saved_detector = detector_;
    const LmcState before = read_storages(exec_);
    const int cell = before.mailboxes[static_cast<std::size_t>(before.pc)];

    exec::ActionTrace records{exec::inject(exec_, stage::cycle_start, exec_.make_thing("signal", std::string("cycle")))};
    auto rest = exec::run(exec_, tick_budget);
    records.insert(records.end(), rest.begin(), rest.end());

    if (exec_.stalled()) {
      // Nothing is committed; the whole instruction runs again once input arrives.
      exec_ = checkpoint;
      detector_ = saved_detector;
      awaiting_ = true;
      if (policy_ == StarvationPolicy::error) throw InputExhausted(before.pc);
      return StepResult{StepStatus::awaiting_input, {}, {}, std::nullopt};
    }

    StepResult result;
    result.occurrences = absorb(records);
    result.records = std::move(records);
    awaiting_ = false;
    if (exec_.fault()) {
      fault_ = LmcFault(before.pc, cell).what();
      exec_ = checkpoint;
      result.status = StepStatus::faulted;
      result.fault = fault_;
    } else if (exec_.halted()) {
      result.status = StepStatus::halted;
    } else if (!exec_.quiescent()) {
      result.status = StepStatus::tick_limit;
    }
    return result;
  }

  void provide_input(int value) {
    if (!is_cell(value)) throw PreconditionError("input value " + std::to_string(value) + " outside 0-999");
    auto& tray = exec_.storage(storage::input);
    tray.push_back(exec_.make_thing("data", std::int64_t{value}));
  }

  LmcState state() const {
    LmcState s = read_storages(exec_);
    s.awaiting_input = awaiting_;
    return s;
  }

  bool halted() const noexcept { return exec_.halted(); }
  const std::optional<std::string>& fault() const noexcept { return fault_; }
  bool awaiting_input() const noexcept { return awaiting_; }
  exec::Tick tick() const noexcept { return exec_.tick(); }
  const exec::ActionTrace& trace() const noexcept { return trace_; }
  const std::vector<events::EventOccurrence>& occurrences() const noexcept { return occurrences_; }
  const core::StaticModel& model() const noexcept { return exec_.model(); }

 private:
  using EventDetector = events::EventDetector;

  std::vector<events::EventOccurrence> absorb(const exec::ActionTrace& records) {
    for (const auto& r : records) detector_.feed(r);
    auto found = detector_.flush();
    trace_.insert(trace_.end(), records.begin(), records.end());
    occurrences_.insert(occurrences_.end(), found.begin(), found.end());
    return found;
  }

  ExecState exec_;
  EventDetector detector_;
  StarvationPolicy policy_;
  bool awaiting_ = false;
  std::optional<std::string> fault_;
  exec::ActionTrace trace_;
  std::vector<events::EventOccurrence> occurrences_;
};

struct TmRunOptions {
  long max_steps = 10000;
  exec::Tick max_ticks = 10'000'000;
  StarvationPolicy policy = StarvationPolicy::pause;
};

struct TmRun {
  LmcState final_state;
  std::vector<LmcState> snapshots;  // same layout as ReferenceRun::snapshots
  exec::ActionTrace trace;
  std::vector<events::EventOccurrence> occurrences;
  StopReason stop = StopReason::step_limit;
};

// Faults propagate as LmcFault after the partial trace is discarded.
inline TmRun tm_run(const LmcState& initial, const TmRunOptions& options = {}) {
  if (options.max_steps < 0) throw PreconditionError("max_steps must be non-negative");
  TmMachine m(initial, options.policy);
  TmRun run;
  run.snapshots.push_back(m.state());
  for (long i = 0;; ++i) {
    if (m.halted()) {
      run.stop = StopReason::halted;
      break;
    }
    if (m.awaiting_input() && m.state().trays.input.empty()) {
      run.stop = StopReason::awaiting_input;
      break;
    }
    if (i >= options.max_steps || m.tick() >= options.max_ticks) {
      run.stop = StopReason::step_limit;
      break;
    }
    const LmcState before = m.state();
    auto r = m.step_instruction(std::min(TmMachine::default_tick_budget, options.max_ticks - m.tick()));
    if (r.status == StepStatus::faulted) {
      throw LmcFault(before.pc, before.mailboxes[static_cast<std::size_t>(before.pc)]);
    }
    run.snapshots.push_back(m.state());
    if (r.status == StepStatus::tick_limit) {
      run.stop = StopReason::step_limit;
      break;
    }
  }
  run.final_state = m.state();
  run.trace = m.trace();
  run.occurrences = m.occurrences();
  return run;
}

inline TmRun tm_run(std::span<const int> image, std::span<const int> input, const TmRunOptions& options = {}) {
  return tm_run(initial_state(image, input), options);
}

}  // namespace tmw::lmc
