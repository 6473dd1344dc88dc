#pragma once

// The LMC as a thinging-machine model. Stage anchors carry the circle numbers
// of the published static diagram so the model can be audited against it.
//
// One instruction cycle, by machine:
//   little man  create a cycle signal, triggering the counter read
//   pc          read (1), increment (2), release the fetch address
//   memory      look the address up (4), release the instruction (5)
//   decode      split into opcode (7) and address (8)
//   dispatch    receive both; the opcode process (9) triggers exactly one
//               opcode stage through guards "opcode=0" ... "opcode=9"
// Branch and load addresses share one routing channel (22, 23) that passes
// through the pc machine; pc.route hands load addresses on to memory and
// branch addresses to pc.write.

#include <string>
#include <vector>

#include "tmw/core/model.hpp"
#include "tmw/events/events.hpp"

namespace tmw::lmc {

using core::StageKind;

namespace stage {
inline constexpr const char* cycle_start = "little_man.start";
inline constexpr const char* reset_entry = "pc.reset_transfer";
inline constexpr const char* decode = "decode.decode";
}  // namespace stage

namespace storage {
inline constexpr const char* pc = "pc.value";
inline constexpr const char* mailboxes = "memory.mailboxes";
inline constexpr const char* store_buffer = "memory.store_buffer";
inline constexpr const char* address_register = "dispatch.address_register";
inline constexpr const char* value = "calc.value";
inline constexpr const char* flag = "calc.flag";
inline constexpr const char* input = "input.tray";
inline constexpr const char* output = "output.tray";
}  // namespace storage

inline std::string circle(int n) { return "circle " + std::to_string(n); }

inline core::StaticModel lmc_static_model() {
  using K = StageKind;
  core::ModelBuilder b("little-man-computer");

  b.machine("lmc", "Little Man Computer")
      .machine("little_man", "Little man", "lmc")
      .machine("pc", "Program counter", "lmc")
      .machine("memory", "Mail system (100 mailboxes)", "lmc")
      .machine("decode", "Instruction decode", "lmc")
      .machine("dispatch", "Opcode dispatch", "lmc")
      .machine("calc", "Calculator", "lmc")
      .machine("input", "Input tray", "lmc")
      .machine("output", "Output tray", "lmc");

  b.storage(storage::pc, "pc")
      .storage(storage::mailboxes, "memory")
      .storage(storage::store_buffer, "memory")
      .storage(storage::address_register, "dispatch")
      .storage(storage::value, "calc")
      .storage(storage::flag, "calc")
      .storage(storage::input, "input")
      .storage(storage::output, "output");

  b.stage("little_man.start", K::create, "little_man");

  // Program counter, including the reset input and the address-routing channel.
  b.stage("pc.reset_transfer", K::transfer, "pc")
      .stage("pc.reset_receive", K::receive, "pc")
      .stage("pc.reset", K::process, "pc", std::nullopt, storage::pc)
      .stage("pc.read", K::process, "pc", circle(1), storage::pc)
      .stage("pc.increment", K::process, "pc", circle(2), storage::pc)
      .stage("pc.release_address", K::release, "pc")
      .stage("pc.transfer_address", K::transfer, "pc")
      .stage("pc.route_transfer", K::transfer, "pc", circle(23))
      .stage("pc.route_receive", K::receive, "pc")
      .stage("pc.route", K::process, "pc")
      .stage("pc.write", K::process, "pc", std::nullopt, storage::pc)
      .stage("pc.route_release", K::release, "pc")
      .stage("pc.route_transfer_out", K::transfer, "pc");

  b.stage("memory.transfer_fetch", K::transfer, "memory", circle(3))
      .stage("memory.receive_fetch", K::receive, "memory")
      .stage("memory.transfer_operand", K::transfer, "memory")
      .stage("memory.receive_operand", K::receive, "memory")
      .stage("memory.transfer_load", K::transfer, "memory")
      .stage("memory.receive_load", K::receive, "memory")
      .stage("memory.lookup", K::process, "memory", circle(4), storage::mailboxes)
      .stage("memory.release_instruction", K::release, "memory", circle(5))
      .stage("memory.transfer_instruction", K::transfer, "memory")
      .stage("memory.release_add", K::release, "memory", circle(11))
      .stage("memory.transfer_add", K::transfer, "memory")
      .stage("memory.release_sub", K::release, "memory", circle(15))
      .stage("memory.transfer_sub", K::transfer, "memory")
      .stage("memory.release_load", K::release, "memory", circle(24))
      .stage("memory.transfer_load_value", K::transfer, "memory")
      .stage("memory.transfer_store_address", K::transfer, "memory")
      .stage("memory.receive_store_address", K::receive, "memory", circle(44))
      .stage("memory.transfer_store_value", K::transfer, "memory")
      .stage("memory.receive_store_value", K::receive, "memory")
      .stage("memory.store_join", K::process, "memory", std::nullopt, storage::store_buffer)
      .stage("memory.store", K::process, "memory", circle(47), storage::mailboxes);

  b.stage("decode.transfer_instruction", K::transfer, "decode")
      .stage("decode.receive_instruction", K::receive, "decode")
      .stage("decode.decode", K::process, "decode", circle(6))
      .stage("decode.release_opcode", K::release, "decode", circle(7))
      .stage("decode.transfer_opcode", K::transfer, "decode")
      .stage("decode.release_address", K::release, "decode", circle(8))
      .stage("decode.transfer_address", K::transfer, "decode");

  const auto reg = std::optional<std::string>(storage::address_register);
  b.stage("dispatch.transfer_opcode", K::transfer, "dispatch")
      .stage("dispatch.receive_opcode", K::receive, "dispatch")
      .stage("dispatch.opcode", K::process, "dispatch", circle(9))
      .stage("dispatch.transfer_address", K::transfer, "dispatch")
      .stage("dispatch.receive_address", K::receive, "dispatch")
      .stage("dispatch.hold_address", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.halt", K::process, "dispatch")
      .stage("dispatch.add", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.subtract", K::process, "dispatch", circle(14), reg)
      .stage("dispatch.store", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.invalid", K::process, "dispatch")
      .stage("dispatch.load", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.branch", K::process, "dispatch", circle(27), reg)
      .stage("dispatch.branch_zero", K::process, "dispatch")
      .stage("dispatch.branch_positive", K::process, "dispatch", circle(30))
      .stage("dispatch.io", K::process, "dispatch", circle(34))
      .stage("dispatch.examine_address", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.is_input", K::process, "dispatch")
      .stage("dispatch.is_output", K::process, "dispatch", circle(39))
      .stage("dispatch.take_branch", K::process, "dispatch", std::nullopt, reg)
      .stage("dispatch.operand_release", K::release, "dispatch", circle(10))
      .stage("dispatch.operand_transfer", K::transfer, "dispatch")
      .stage("dispatch.route_release", K::release, "dispatch", circle(22))
      .stage("dispatch.route_transfer", K::transfer, "dispatch")
      .stage("dispatch.store_release", K::release, "dispatch", circle(43))
      .stage("dispatch.store_transfer", K::transfer, "dispatch");

  const auto acc = std::optional<std::string>(storage::value);
  const auto flag = std::optional<std::string>(storage::flag);
  b.stage("calc.transfer_add", K::transfer, "calc", circle(12))
      .stage("calc.receive_add", K::receive, "calc")
      .stage("calc.add", K::process, "calc", circle(13), acc)
      .stage("calc.transfer_sub", K::transfer, "calc", circle(16))
      .stage("calc.receive_sub", K::receive, "calc")
      .stage("calc.subtract", K::process, "calc", circle(17), acc)
      .stage("calc.examine", K::process, "calc", circle(18))
      .stage("calc.store_difference", K::process, "calc", circle(19), acc)
      .stage("calc.set_negative", K::process, "calc", circle(20), flag)
      .stage("calc.transfer_load", K::transfer, "calc")
      .stage("calc.receive_load", K::receive, "calc", circle(25))
      .stage("calc.load", K::process, "calc", circle(26), acc)
      .stage("calc.test_zero", K::process, "calc", circle(28), acc)
      .stage("calc.is_zero", K::process, "calc")
      .stage("calc.test_flag", K::process, "calc", circle(31), flag)
      .stage("calc.is_positive", K::process, "calc", circle(32))
      .stage("calc.transfer_input", K::transfer, "calc")
      .stage("calc.receive_input", K::receive, "calc")
      .stage("calc.set_from_input", K::process, "calc", circle(38), acc)
      .stage("calc.release_output", K::release, "calc", circle(40), acc)
      .stage("calc.transfer_output", K::transfer, "calc", circle(41))
      .stage("calc.release_store", K::release, "calc", circle(45), acc)
      .stage("calc.transfer_store", K::transfer, "calc");

  b.stage("input.take", K::process, "input", circle(35), storage::input)
      .stage("input.release_top", K::release, "input", circle(36))
      .stage("input.transfer", K::transfer, "input", circle(37));

  b.stage("output.transfer", K::transfer, "output")
      .stage("output.receive", K::receive, "output")
      .stage("output.append", K::process, "output", circle(42), storage::output);

  // Reset and fetch.
  b.chain({"pc.reset_transfer", "pc.reset_receive", "pc.reset"});
  b.chain({"pc.read", "pc.increment", "pc.release_address", "pc.transfer_address", "memory.transfer_fetch",
           "memory.receive_fetch", "memory.lookup"});
  b.chain({"memory.lookup", "memory.release_instruction", "memory.transfer_instruction", "decode.transfer_instruction",
           "decode.receive_instruction", "decode.decode"});
  b.chain({"decode.decode", "decode.release_opcode", "decode.transfer_opcode", "dispatch.transfer_opcode",
           "dispatch.receive_opcode", "dispatch.opcode"});
  b.chain({"decode.decode", "decode.release_address", "decode.transfer_address", "dispatch.transfer_address",
           "dispatch.receive_address", "dispatch.hold_address"});

  // Operand fetch for ADD and SUB.
  b.flow("dispatch.add", "dispatch.operand_release").flow("dispatch.subtract", "dispatch.operand_release");
  b.chain({"dispatch.operand_release", "dispatch.operand_transfer", "memory.transfer_operand",
           "memory.receive_operand", "memory.lookup"});
  b.chain({"memory.lookup", "memory.release_add", "memory.transfer_add", "calc.transfer_add", "calc.receive_add",
           "calc.add"});
  b.chain({"memory.lookup", "memory.release_sub", "memory.transfer_sub", "calc.transfer_sub", "calc.receive_sub",
           "calc.subtract", "calc.examine"});

  // Load and branch addresses travel through the pc machine.
  b.flow("dispatch.load", "dispatch.route_release")
      .flow("dispatch.branch", "dispatch.route_release")
      .flow("dispatch.take_branch", "dispatch.route_release");
  b.chain({"dispatch.route_release", "dispatch.route_transfer", "pc.route_transfer", "pc.route_receive", "pc.route"});
  b.flow("pc.route", "pc.write");
  b.chain({"pc.route", "pc.route_release", "pc.route_transfer_out", "memory.transfer_load", "memory.receive_load",
           "memory.lookup"});
  b.chain({"memory.lookup", "memory.release_load", "memory.transfer_load_value", "calc.transfer_load",
           "calc.receive_load", "calc.load"});

  // Store: address and calculator value meet in memory.
  b.chain({"dispatch.store", "dispatch.store_release", "dispatch.store_transfer", "memory.transfer_store_address",
           "memory.receive_store_address", "memory.store_join"});
  b.chain({"calc.release_store", "calc.transfer_store", "memory.transfer_store_value", "memory.receive_store_value",
           "memory.store_join"});

  // Trays.
  b.chain({"input.take", "input.release_top", "input.transfer", "calc.transfer_input", "calc.receive_input",
           "calc.set_from_input"});
  b.chain({"calc.release_output", "calc.transfer_output", "output.transfer", "output.receive", "output.append"});

  b.trigger("t.cycle", "little_man.start", "pc.read");
  const char* opcode_targets[] = {"dispatch.halt",  "dispatch.add",    "dispatch.subtract",   "dispatch.store",
                                  "dispatch.invalid", "dispatch.load", "dispatch.branch",     "dispatch.branch_zero",
                                  "dispatch.branch_positive", "dispatch.io"};
  for (int op = 0; op < 10; ++op) {
    b.trigger("t.op" + std::to_string(op), "dispatch.opcode", opcode_targets[op], "opcode=" + std::to_string(op));
  }
  b.trigger("t.store_value", "dispatch.store", "calc.release_store")
      .trigger("t.store", "memory.store_join", "memory.store", "store ready", circle(46))
      .trigger("t.sign_positive", "calc.examine", "calc.store_difference", "d≥0")
      .trigger("t.sign_negative", "calc.examine", "calc.set_negative", "d<0")
      .trigger("t.test_zero", "dispatch.branch_zero", "calc.test_zero")
      .trigger("t.is_zero", "calc.test_zero", "calc.is_zero", "value=0")
      .trigger("t.branch_zero", "calc.is_zero", "dispatch.take_branch", std::nullopt, circle(29))
      .trigger("t.test_flag", "dispatch.branch_positive", "calc.test_flag")
      .trigger("t.is_positive", "calc.test_flag", "calc.is_positive", "flag clear")
      .trigger("t.branch_positive", "calc.is_positive", "dispatch.take_branch")
      .trigger("t.io", "dispatch.io", "dispatch.examine_address")
      .trigger("t.input", "dispatch.examine_address", "dispatch.is_input", "addr=01")
      .trigger("t.output", "dispatch.examine_address", "dispatch.is_output", "addr=02")
      .trigger("t.take_input", "dispatch.is_input", "input.take")
      .trigger("t.emit_output", "dispatch.is_output", "calc.release_output");

  return b.build();
}

inline std::vector<events::EventDef> lmc_event_defs() {
  auto opcode_event = [](int n, const char* stage, std::string doc_suffix) {
    auto id = "E" + std::to_string(n + 7);
    return events::EventDef{id,
                            "opcode " + std::to_string(n),
                            {"t.op" + std::to_string(n), stage},
                            "opcode=" + std::to_string(n),
                            "The opcode is processed and found to be " + std::to_string(n) + doc_suffix + "."};
  };
  std::vector<events::EventDef> defs = {
      {"E1", "reset input", {"pc.reset_transfer", "pc.reset_receive"}, std::nullopt,
       "The value zero is input from the outside."},
      {"E2", "pc initialized", {"pc.reset"}, std::nullopt, "The program counter is initialized to a new value."},
      {"E3", "pc incremented", {"pc.increment"}, std::nullopt, "The program counter is incremented."},
      {"E4", "fetch address to memory", {"pc.release_address", "memory.receive_fetch"}, std::nullopt,
       "The program counter value flows to the memory system."},
      {"E5", "instruction fetched", {"memory.release_instruction", "decode.receive_instruction"}, std::nullopt,
       "The content of memory location (instruction) that correspond to the program counter is retrieved and sent "
       "to be processed."},
      {"E6", "instruction decoded", {"decode.decode", "decode.release_opcode", "decode.release_address"}, std::nullopt,
       "The instruction processing produces the opcode and the address."},
      opcode_event(0, "dispatch.halt", ""),
      opcode_event(1, "dispatch.add", " (add)"),
      opcode_event(2, "dispatch.subtract", " (subtract)"),
      opcode_event(3, "dispatch.store", " (store)"),
      opcode_event(4, "dispatch.invalid", ""),
      opcode_event(5, "dispatch.load", " (load)"),
      opcode_event(6, "dispatch.branch", " (branch)"),
      opcode_event(7, "dispatch.branch_zero", " (branch on 0)"),
      opcode_event(8, "dispatch.branch_positive", " (branch on positive)"),
      opcode_event(9, "dispatch.io", " (input/output)"),
      {"E17", "operand address to memory", {"dispatch.operand_release", "memory.receive_operand"}, std::nullopt,
       "The address is sent to the mail system."},
      {"E18", "add", {"memory.release_add", "calc.add"}, std::nullopt,
       "The value of the mailbox location is retrieved and sent to the calculator where it is added to the "
       "calculator value."},
      {"E19", "subtract", {"memory.release_sub", "calc.subtract"}, std::nullopt,
       "The value of the mailbox location is retrieved and sent to the calculator where it is subtracted from the "
       "calculator value."},
      {"E20", "difference non-negative", {"t.sign_positive", "calc.store_difference"}, "d≥0",
       "The result of subtraction is positive; hence, the value is stored in the calculator."},
      {"E21", "difference negative", {"t.sign_negative", "calc.set_negative"}, "d<0",
       "The result of subtraction is negative; hence, the negative flag is set ON and the value is stored in the "
       "calculator."},
      {"E22", "value to mailboxes", {"calc.release_store", "memory.receive_store_value"}, std::nullopt,
       "The value of the calculator is sent to the mailbox system."},
      {"E23", "store address to memory", {"dispatch.store_release", "memory.receive_store_address"}, std::nullopt,
       "The address is sent to the mail system."},
      {"E24", "store", {"memory.store"}, "store ready",
       "The data incoming to the mailbox system (E22) are stored in the memory according to the given address (E23)."},
      {"E25", "load", {"memory.receive_load", "calc.load"}, std::nullopt,
       "The address is sent to the memory system and the value of the location is loaded in the calculator."},
      {"E26", "branch address to pc", {"pc.route->pc.write", "pc.write"}, std::nullopt,
       "The address is sent to the program counter."},
      {"E27", "calculator zero", {"t.is_zero", "calc.is_zero"}, "value=0",
       "The calculator value is processed and found to be 0."},
      {"E28", "calculator positive", {"t.is_positive", "calc.is_positive"}, "flag clear",
       "The calculator value is processed and found to be positive."},
      {"E29", "input selected", {"t.input", "dispatch.is_input"}, "addr=01", "The address is 01 (input)."},
      {"E30", "output selected", {"t.output", "dispatch.is_output"}, "addr=02", "The address is 02 (output)."},
      {"E31", "input to calculator", {"input.release_top", "calc.set_from_input"}, std::nullopt,
       "Move the top of the input tray to the calculator."},
      {"E32", "calculator to output", {"calc.release_output", "output.append"}, std::nullopt,
       "Move the value of the calculator to the output tray."},
  };
  return defs;
}

// Allowed event successions. Every opcode path returns to the fetch (E3)
// except HLT (E7). E11 (opcode 4) faults at run time; its edge back to E3 only
// keeps the graph free of dead ends other than halt.
inline events::BehavioralModel lmc_behavioral_model() {
  events::BehavioralModel b;
  for (int i = 1; i <= 32; ++i) b.nodes.push_back("E" + std::to_string(i));
  b.start = {"E1"};
  auto edge = [&](int from, int to) { b.edges.emplace_back("E" + std::to_string(from), "E" + std::to_string(to)); };
  edge(1, 2);
  edge(2, 3);
  edge(3, 4);
  edge(4, 5);
  edge(5, 6);
  for (int e = 7; e <= 16; ++e) edge(6, e);
  edge(8, 17);
  edge(9, 17);
  edge(17, 18);
  edge(17, 19);
  edge(18, 3);
  edge(19, 20);
  edge(19, 21);
  edge(20, 3);
  edge(21, 3);
  edge(10, 22);
  edge(22, 23);
  edge(23, 24);
  edge(24, 3);
  edge(11, 3);
  edge(12, 25);
  edge(25, 3);
  edge(13, 26);
  edge(26, 3);
  edge(14, 27);
  edge(14, 3);
  edge(27, 26);
  edge(15, 28);
  edge(15, 3);
  edge(28, 26);
  edge(16, 29);
  edge(16, 30);
  edge(29, 31);
  edge(31, 3);
  edge(30, 32);
  edge(32, 3);
  return b;
}

}  // namespace tmw::lmc
