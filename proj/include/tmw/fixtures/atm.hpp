#pragma once

// Card / PIN / amount exchange between a user, an ATM and a bank, used as a
// small fixture for the generic engine and the event layer.

#include <algorithm>
#include <string>
#include <vector>

#include "tmw/core/model.hpp"
#include "tmw/events/events.hpp"
#include "tmw/exec/engine.hpp"

namespace tmw::fixtures {

using core::StageKind;
using core::Thing;
using exec::EffectContext;

inline std::string atm_circle(int n) { return "circle " + std::to_string(n); }

inline core::StaticModel atm_static_model() {
  using K = StageKind;
  auto c = atm_circle;
  core::ModelBuilder b("atm");
  b.machine("user", "User").machine("atm", "ATM").machine("bank", "Bank");
  b.storage("atm.card_slot", "atm").storage("atm.cash", "atm").storage("bank.accounts", "bank").storage(
      "bank.pending", "bank");

  b.stage("user.card_transfer", K::transfer, "user", c(1))
      .stage("user.transfer_pin_request", K::transfer, "user")
      .stage("user.receive_pin_request", K::receive, "user")
      .stage("user.create_pin", K::create, "user", c(8))
      .stage("user.release_pin", K::release, "user")
      .stage("user.transfer_pin", K::transfer, "user")
      .stage("user.transfer_amount_request", K::transfer, "user")
      .stage("user.receive_amount_request", K::receive, "user")
      .stage("user.create_amount", K::create, "user", c(18))
      .stage("user.release_amount", K::release, "user")
      .stage("user.transfer_amount", K::transfer, "user")
      .stage("user.transfer_cash", K::transfer, "user")
      .stage("user.receive_cash", K::receive, "user")
      .stage("user.transfer_card", K::transfer, "user")
      .stage("user.receive_card", K::receive, "user");

  b.stage("atm.card_transfer", K::transfer, "atm", c(2))
      .stage("atm.card_receive", K::receive, "atm", c(3))
      .stage("atm.process_card", K::process, "atm", c(4), std::string("atm.card_slot"))
      .stage("atm.create_pin_request", K::create, "atm", c(6))
      .stage("atm.release_pin_request", K::release, "atm")
      .stage("atm.transfer_pin_request", K::transfer, "atm", c(7))
      .stage("atm.transfer_pin", K::transfer, "atm", c(9))
      .stage("atm.receive_pin", K::receive, "atm")
      .stage("atm.process_pin", K::process, "atm", c(10))
      .stage("atm.release_pin", K::release, "atm")
      .stage("atm.transfer_pin_out", K::transfer, "atm", c(11))
      .stage("atm.transfer_ok", K::transfer, "atm", c(14))
      .stage("atm.receive_ok", K::receive, "atm")
      .stage("atm.process_ok", K::process, "atm", c(15))
      .stage("atm.create_amount_request", K::create, "atm", c(16))
      .stage("atm.release_amount_request", K::release, "atm")
      .stage("atm.transfer_amount_request", K::transfer, "atm", c(17))
      .stage("atm.transfer_amount", K::transfer, "atm", c(19))
      .stage("atm.receive_amount", K::receive, "atm")
      .stage("atm.process_amount", K::process, "atm", std::nullopt, std::string("atm.cash"))
      .stage("atm.release_amount", K::release, "atm")
      .stage("atm.transfer_amount_out", K::transfer, "atm", c(20))
      .stage("atm.transfer_response", K::transfer, "atm", c(25))
      .stage("atm.receive_response", K::receive, "atm")
      .stage("atm.process_response", K::process, "atm")
      .stage("atm.insufficient", K::process, "atm", c(26))
      .stage("atm.sufficient", K::process, "atm", c(28))
      .stage("atm.retrieve_cash", K::process, "atm", c(29), std::string("atm.cash"))
      .stage("atm.release_cash", K::release, "atm", c(30))
      .stage("atm.transfer_cash", K::transfer, "atm")
      .stage("atm.return_card", K::release, "atm", std::nullopt, std::string("atm.card_slot"))
      .stage("atm.transfer_card", K::transfer, "atm");

  b.stage("bank.transfer_pin", K::transfer, "bank")
      .stage("bank.receive_pin", K::receive, "bank")
      .stage("bank.process_pin", K::process, "bank", c(12), std::string("bank.accounts"))
      .stage("bank.create_ok", K::create, "bank", c(13))
      .stage("bank.release_ok", K::release, "bank")
      .stage("bank.transfer_ok", K::transfer, "bank")
      .stage("bank.transfer_amount", K::transfer, "bank")
      .stage("bank.receive_amount", K::receive, "bank", c(21))
      .stage("bank.retrieve_balance", K::process, "bank", c(22), std::string("bank.accounts"))
      .stage("bank.compare", K::process, "bank", c(23), std::string("bank.pending"))
      .stage("bank.create_response", K::create, "bank", c(24), std::string("bank.accounts"))
      .stage("bank.release_response", K::release, "bank")
      .stage("bank.transfer_response", K::transfer, "bank");

  b.chain({"user.card_transfer", "atm.card_transfer", "atm.card_receive", "atm.process_card"});
  b.chain({"atm.create_pin_request", "atm.release_pin_request", "atm.transfer_pin_request",
           "user.transfer_pin_request", "user.receive_pin_request"});
  b.chain({"user.create_pin", "user.release_pin", "user.transfer_pin", "atm.transfer_pin", "atm.receive_pin",
           "atm.process_pin", "atm.release_pin", "atm.transfer_pin_out", "bank.transfer_pin", "bank.receive_pin",
           "bank.process_pin"});
  b.chain({"bank.create_ok", "bank.release_ok", "bank.transfer_ok", "atm.transfer_ok", "atm.receive_ok",
           "atm.process_ok"});
  b.chain({"atm.create_amount_request", "atm.release_amount_request", "atm.transfer_amount_request",
           "user.transfer_amount_request", "user.receive_amount_request"});
  b.chain({"user.create_amount", "user.release_amount", "user.transfer_amount", "atm.transfer_amount",
           "atm.receive_amount", "atm.process_amount", "atm.release_amount", "atm.transfer_amount_out",
           "bank.transfer_amount", "bank.receive_amount", "bank.compare"});
  b.flow("bank.retrieve_balance", "bank.compare");
  b.chain({"bank.create_response", "bank.release_response", "bank.transfer_response", "atm.transfer_response",
           "atm.receive_response", "atm.process_response"});
  b.chain({"atm.retrieve_cash", "atm.release_cash", "atm.transfer_cash", "user.transfer_cash", "user.receive_cash"});
  b.chain({"atm.return_card", "atm.transfer_card", "user.transfer_card", "user.receive_card"});

  b.trigger("t.pin_request", "atm.process_card", "atm.create_pin_request", std::nullopt, c(5))
      .trigger("t.ok", "bank.process_pin", "bank.create_ok", "pin ok")
      .trigger("t.amount_request", "atm.process_ok", "atm.create_amount_request")
      .trigger("t.balance", "bank.receive_amount", "bank.retrieve_balance")
      .trigger("t.response", "bank.compare", "bank.create_response", "compared")
      .trigger("t.insufficient", "atm.process_response", "atm.insufficient", "insufficient")
      .trigger("t.sufficient", "atm.process_response", "atm.sufficient", "sufficient")
      .trigger("t.return_card_declined", "atm.insufficient", "atm.return_card", std::nullopt, c(27))
      .trigger("t.cash", "atm.sufficient", "atm.retrieve_cash")
      .trigger("t.return_card_paid", "atm.sufficient", "atm.return_card", std::nullopt, c(31));
  return b.build();
}

struct AtmAccount {
  std::int64_t pin = 1234;
  std::int64_t balance = 500;
};

inline exec::HostBinding atm_host_binding() {
  exec::HostBinding h;
  auto& fx = h.effects;
  fx["atm.process_card"] = [](EffectContext& ctx) { ctx.storage("atm.card_slot").push_back(ctx.input()); };
  fx["atm.create_pin_request"] = [](EffectContext& ctx) { ctx.emit(ctx.make("pin-request", std::string("PIN?"))); };
  fx["bank.process_pin"] = [](EffectContext&) {};
  fx["bank.create_ok"] = [](EffectContext& ctx) { ctx.emit(ctx.make("ok", std::string("OK"))); };
  fx["atm.process_ok"] = [](EffectContext&) {};
  fx["atm.process_amount"] = [](EffectContext& ctx) {
    ctx.storage("atm.cash") = {Thing{"withdrawal", "money", ctx.input().payload}};
    ctx.pass();
  };
  fx["atm.create_amount_request"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("amount-request", std::string("amount?")));
  };
  fx["bank.retrieve_balance"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("balance", ctx.storage("bank.accounts").at(1).payload));
  };
  fx["bank.compare"] = [](EffectContext& ctx) { ctx.storage("bank.pending").push_back(ctx.input()); };
  fx["bank.create_response"] = [](EffectContext& ctx) {
    auto& pending = ctx.storage("bank.pending");
    std::int64_t amount = 0, balance = 0;
    for (const auto& t : pending) (t.kind == "balance" ? balance : amount) = t.number();
    pending.clear();
    bool ok = amount <= balance;
    if (ok) ctx.storage("bank.accounts").at(1).payload = balance - amount;
    ctx.emit(ctx.make("response", std::string(ok ? "sufficient" : "insufficient")));
  };
  fx["atm.process_response"] = [](EffectContext&) {};
  fx["atm.insufficient"] = [](EffectContext&) {};
  fx["atm.sufficient"] = [](EffectContext&) {};
  fx["atm.retrieve_cash"] = [](EffectContext& ctx) {
    ctx.emit(ctx.make("cash", ctx.storage("atm.cash").at(0).payload));
  };
  fx["atm.return_card"] = [](EffectContext& ctx) {
    auto& slot = ctx.storage("atm.card_slot");
    if (slot.empty()) return;
    ctx.emit(slot.front());
    slot.clear();
  };

  auto& g = h.guards;
  g["pin ok"] = [](const exec::ExecState& s, const Thing& pin) { return pin.number() == s.storage("bank.accounts").at(0).number(); };
  g["compared"] = [](const exec::ExecState& s, const Thing&) { return s.storage("bank.pending").size() == 2; };
  g["sufficient"] = [](const exec::ExecState&, const Thing& t) { return t.payload == core::Payload{std::string("sufficient")}; };
  g["insufficient"] = [](const exec::ExecState&, const Thing& t) {
    return t.payload == core::Payload{std::string("insufficient")};
  };
  return h;
}

inline std::vector<events::EventDef> atm_event_defs() {
  return {
      {"E1", "card inserted", {"user.card_transfer", "atm.card_receive"}, std::nullopt,
       "The user inserts his or her card that is received by the ATM."},
      {"E2", "PIN requested", {"atm.process_card", "atm.create_pin_request", "user.receive_pin_request"}, std::nullopt,
       "The ATM processes the card and generates a request for the PIN."},
      {"E3", "PIN entered", {"user.create_pin", "atm.receive_pin", "atm.process_pin"}, std::nullopt,
       "The user inputs the PIN that is received and processed by the ATM."},
      {"E4", "PIN to bank", {"atm.transfer_pin_out", "bank.receive_pin", "bank.process_pin"}, std::nullopt,
       "The ATM sends the PIN to the bank to be processed."},
      {"E5", "OK to ATM", {"bank.create_ok", "atm.receive_ok"}, "pin ok", "The bank sends OK message to the ATM."},
      {"E6", "amount requested", {"atm.process_ok", "atm.create_amount_request", "user.receive_amount_request"},
       std::nullopt, "The ATM requests the amount from the user."},
      {"E7", "amount entered", {"user.create_amount", "atm.receive_amount"}, std::nullopt,
       "The user inputs the amount that is received by the ATM."},
      {"E8", "amount to bank", {"atm.transfer_amount_out", "bank.receive_amount"}, std::nullopt,
       "The ATM sends the amount to the bank."},
      {"E9", "compare", {"bank.retrieve_balance", "bank.compare"}, std::nullopt,
       "The bank compares the requested amount with the relevant account."},
      {"E10", "response", {"bank.create_response", "atm.receive_response"}, "compared",
       "A bank response is created and sent to the ATM."},
      {"E11", "insufficient funds", {"atm.insufficient", "atm.return_card", "user.receive_card"}, "insufficient",
       "The ATM processes the response that reports the funds are insufficient, thus the card is returned to the "
       "user."},
      {"E12", "sufficient funds", {"atm.sufficient", "atm.retrieve_cash", "user.receive_cash"}, "sufficient",
       "The ATM processes the response that reports funds are sufficient, thus cash is released to the user."},
  };
}

inline events::BehavioralModel atm_behavioral_model() {
  events::BehavioralModel b;
  for (int i = 1; i <= 12; ++i) b.nodes.push_back("E" + std::to_string(i));
  for (int i = 1; i < 10; ++i) b.edges.emplace_back("E" + std::to_string(i), "E" + std::to_string(i + 1));
  b.edges.emplace_back("E10", "E11");
  b.edges.emplace_back("E10", "E12");
  b.start = {"E1"};
  return b;
}

struct AtmRun {
  exec::ActionTrace trace;
  std::vector<events::EventOccurrence> occurrences;
  std::int64_t balance_after = 0;
  std::vector<Thing> user_received;  // things that reached a user receive stage
};

// Scripted session: card, then PIN, then amount, each once the previous
// exchange has settled. The user answers only requests that reached them, so a
// rejected PIN ends the session before any amount is entered.
inline AtmRun run_atm(std::int64_t pin, std::int64_t amount, AtmAccount account = {}) {
  exec::ExecState s(atm_static_model(), atm_host_binding());
  s.storage("bank.accounts") = {Thing{"pin", "pin", account.pin}, Thing{"balance", "money", account.balance}};
  s.storage("atm.cash") = {Thing{"cash", "money", std::int64_t{0}}};
  AtmRun run;
  auto drive = [&](const char* at, Thing thing) {
    run.trace.push_back(exec::inject(s, at, std::move(thing)));
    auto rest = exec::run(s, 1000);
    run.trace.insert(run.trace.end(), rest.begin(), rest.end());
  };
  drive("user.card_transfer", s.make_thing("card", std::string("card")));
  drive("user.create_pin", s.make_thing("pin", pin));
  auto asked = [&](const char* stage) {
    return std::any_of(run.trace.begin(), run.trace.end(), [&](const auto& r) { return r.stage == stage; });
  };
  if (asked("user.receive_amount_request")) drive("user.create_amount", s.make_thing("amount", amount));
  run.occurrences = events::detect_events(run.trace, atm_event_defs());
  run.balance_after = s.storage("bank.accounts").at(1).number();
  for (const auto& r : run.trace) {
    if (r.kind == StageKind::receive && r.stage.starts_with("user.")) run.user_received.push_back(r.thing);
  }
  return run;
}

}  // namespace tmw::fixtures
