#pragma once

// Little Man Computer state and the direct reference interpreter.
//
// Opcodes: 0 HLT, 1 ADD, 2 SUB, 3 STA, 4 (invalid), 5 LDA, 6 BRA, 7 BRZ,
// 8 BRP, 901 INP, 902 OUT. A negative SUB result d is stored as d + 1000
// with the negative flag set.

#include <array>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmw/error.hpp"

namespace tmw::lmc {

using nlohmann::json;

inline constexpr int mailbox_count = 100;
inline constexpr int cell_modulus = 1000;

using Mailboxes = std::array<int, mailbox_count>;

struct Calculator {
  int value = 0;
  bool negative = false;

  friend bool operator==(const Calculator&, const Calculator&) = default;
};

struct Trays {
  std::deque<int> input;
  std::vector<int> output;

  friend bool operator==(const Trays&, const Trays&) = default;
};

struct LmcState {
  Mailboxes mailboxes{};
  Calculator calculator;
  int pc = 0;
  Trays trays;
  bool halted = false;
  bool awaiting_input = false;

  friend bool operator==(const LmcState&, const LmcState&) = default;
};

struct Instruction {
  int opcode = 0;
  int address = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

namespace opcode {
inline constexpr int hlt = 0;
inline constexpr int add = 1;
inline constexpr int sub = 2;
inline constexpr int sta = 3;
inline constexpr int lda = 5;
inline constexpr int bra = 6;
inline constexpr int brz = 7;
inline constexpr int brp = 8;
inline constexpr int io = 9;
}  // namespace opcode

inline constexpr int inp_cell = 901;
inline constexpr int out_cell = 902;

constexpr bool is_cell(int value) noexcept { return value >= 0 && value < cell_modulus; }
constexpr bool is_address(int value) noexcept { return value >= 0 && value < mailbox_count; }

inline Instruction decode(int cell) {
  if (!is_cell(cell)) throw PreconditionError("cell value " + std::to_string(cell) + " outside 0-999");
  return Instruction{cell / 100, cell % 100};
}

// Opcode 4 or an I/O cell other than 901/902.
class LmcFault : public ExecutionFault {
 public:
  LmcFault(int pc, int cell)
      : ExecutionFault("invalid instruction " + pad(cell) + " at pc=" + std::to_string(pc)), pc_(pc), cell_(cell) {}

  int pc() const noexcept { return pc_; }
  int cell() const noexcept { return cell_; }

  static std::string pad(int cell) {
    std::string s = std::to_string(cell);
    return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
  }

 private:
  int pc_;
  int cell_;
};

class InputExhausted : public Error {
 public:
  explicit InputExhausted(int pc) : Error("input exhausted at pc=" + std::to_string(pc)), pc_(pc) {}
  int pc() const noexcept { return pc_; }

 private:
  int pc_;
};

// What INP does when the input tray is empty.
enum class StarvationPolicy { pause, error };

inline LmcState initial_state(std::span<const int> image, std::span<const int> input = {}) {
  if (image.size() > static_cast<std::size_t>(mailbox_count)) {
    throw PreconditionError("image has " + std::to_string(image.size()) + " cells; at most 100 fit");
  }
  LmcState s;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!is_cell(image[i])) throw PreconditionError("image cell " + std::to_string(i) + " outside 0-999");
    s.mailboxes[i] = image[i];
  }
  for (int v : input) {
    if (!is_cell(v)) throw PreconditionError("input value " + std::to_string(v) + " outside 0-999");
    s.trays.input.push_back(v);
  }
  return s;
}

// Executes exactly one instruction.
inline LmcState reference_step(LmcState s, StarvationPolicy policy = StarvationPolicy::pause) {
  if (s.halted) throw PreconditionError("machine is halted");
  const int at = s.pc;
  const int cell = s.mailboxes[static_cast<std::size_t>(at)];
  const auto [op, addr] = decode(cell);
  const auto a = static_cast<std::size_t>(addr);

  if (op == opcode::io && addr == 1 && s.trays.input.empty()) {
    if (policy == StarvationPolicy::error) throw InputExhausted(at);
    s.awaiting_input = true;
    return s;
  }
  if (op == 4 || (op == opcode::io && addr != 1 && addr != 2)) throw LmcFault(at, cell);

  s.awaiting_input = false;
  s.pc = (s.pc + 1) % mailbox_count;
  auto& calc = s.calculator;
  switch (op) {
    case opcode::hlt:
      s.halted = true;
      break;
    case opcode::add:
      calc.value = (calc.value + s.mailboxes[a]) % cell_modulus;
      break;
    case opcode::sub: {
      int d = calc.value - s.mailboxes[a];
      calc.negative = d < 0;
      calc.value = d < 0 ? d + cell_modulus : d;
      break;
    }
    case opcode::sta:
      s.mailboxes[a] = calc.value;
      break;
    case opcode::lda:
      calc.value = s.mailboxes[a];
      calc.negative = false;
      break;
    case opcode::bra:
      s.pc = addr;
      break;
    case opcode::brz:
      if (calc.value == 0) s.pc = addr;
      break;
    case opcode::brp:
      if (!calc.negative) s.pc = addr;
      break;
    case opcode::io:
      if (addr == 1) {
        calc.value = s.trays.input.front();
        calc.negative = false;
        s.trays.input.pop_front();
      } else {
        s.trays.output.push_back(calc.value);
      }
      break;
  }
  return s;
}

enum class StopReason { halted, awaiting_input, step_limit };

inline const char* to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::halted: return "halted";
    case StopReason::awaiting_input: return "awaiting_input";
    case StopReason::step_limit: return "step_limit";
  }
  return "?";
}

struct ReferenceRun {
  LmcState final_state;
  std::vector<LmcState> snapshots;  // initial state, then one per executed instruction
  StopReason stop = StopReason::step_limit;
};

// A starved INP appends its awaiting_input state as the last snapshot.
inline ReferenceRun run_reference(LmcState state, long max_steps, StarvationPolicy policy = StarvationPolicy::pause) {
  if (max_steps < 0) throw PreconditionError("max_steps must be non-negative");
  ReferenceRun run;
  run.snapshots.push_back(state);
  for (long i = 0;; ++i) {
    if (state.halted) {
      run.stop = StopReason::halted;
      break;
    }
    if (state.awaiting_input && state.trays.input.empty()) {
      run.stop = StopReason::awaiting_input;
      break;
    }
    if (i >= max_steps) {
      run.stop = StopReason::step_limit;
      break;
    }
    state = reference_step(std::move(state), policy);
    run.snapshots.push_back(state);
  }
  run.final_state = std::move(state);
  return run;
}

inline json snapshot_to_json(const LmcState& s) {
  return json{{"pc", s.pc},
              {"value", s.calculator.value},
              {"flag", s.calculator.negative},
              {"halted", s.halted},
              {"awaiting_input", s.awaiting_input},
              {"mailboxes", s.mailboxes},
              {"input", s.trays.input},
              {"output", s.trays.output}};
}

inline LmcState snapshot_from_json(const json& j) {
  try {
    LmcState s;
    s.pc = j.at("pc").get<int>();
    s.calculator.value = j.at("value").get<int>();
    s.calculator.negative = j.at("flag").get<bool>();
    s.halted = j.at("halted").get<bool>();
    s.awaiting_input = j.at("awaiting_input").get<bool>();
    auto cells = j.at("mailboxes").get<std::vector<int>>();
    if (cells.size() != static_cast<std::size_t>(mailbox_count)) throw SchemaError("snapshot needs exactly 100 mailboxes");
    std::copy(cells.begin(), cells.end(), s.mailboxes.begin());
    for (int v : j.at("input").get<std::vector<int>>()) s.trays.input.push_back(v);
    s.trays.output = j.at("output").get<std::vector<int>>();
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("snapshot schema: ") + e.what());
  }
}

// Human-readable first field that differs, or empty when equal.
inline std::string first_difference(const LmcState& a, const LmcState& b) {
  auto show = [](auto x, auto y, const std::string& field) {
    return field + ": " + std::to_string(x) + " vs " + std::to_string(y);
  };
  if (a.pc != b.pc) return show(a.pc, b.pc, "pc");
  if (a.calculator.value != b.calculator.value) return show(a.calculator.value, b.calculator.value, "value");
  if (a.calculator.negative != b.calculator.negative) return show(a.calculator.negative, b.calculator.negative, "flag");
  if (a.halted != b.halted) return show(a.halted, b.halted, "halted");
  if (a.awaiting_input != b.awaiting_input) return show(a.awaiting_input, b.awaiting_input, "awaiting_input");
  for (std::size_t i = 0; i < a.mailboxes.size(); ++i) {
    if (a.mailboxes[i] != b.mailboxes[i]) return show(a.mailboxes[i], b.mailboxes[i], "mailbox " + std::to_string(i));
  }
  if (a.trays.input != b.trays.input) return "input tray differs";
  if (a.trays.output != b.trays.output) return "output tray differs";
  return {};
}

}  // namespace tmw::lmc
