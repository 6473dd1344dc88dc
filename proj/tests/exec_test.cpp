#include <gtest/gtest.h>

#include "test_models.hpp"
#include "tmw/exec/engine.hpp"
#include "tmw/exec/trace_io.hpp"
#include "tmw/fixtures/atm.hpp"

using namespace tmw;
using core::ModelBuilder;
using core::StageKind;
using exec::ExecState;

namespace {

core::Thing data(const char* id, std::int64_t v = 0) { return core::Thing{id, "data", v}; }

// c0 -> p, with a trigger p => c1 guarded by "always".
ExecState micro_model() {
  ModelBuilder b("micro");
  b.machine("M", "M")
      .stage("c0", StageKind::create, "M")
      .stage("p", StageKind::process, "M")
      .stage("c1", StageKind::create, "M");
  b.flow("c0", "p").trigger("t", "p", "c1", "always");
  exec::HostBinding h;
  h.guards["always"] = [](const ExecState&, const core::Thing&) { return true; };
  h.effects["c1"] = [](exec::EffectContext& ctx) { ctx.emit(ctx.make("signal", std::string("made"))); };
  return ExecState(b.build(), std::move(h));
}

}  // namespace

TEST(Inject, AtTransferRecordsATransfer) {
  auto m = fixtures::atm_static_model();
  ExecState s(m, fixtures::atm_host_binding());
  auto rec = exec::inject(s, "user.card_transfer", data("card"));
  EXPECT_EQ(rec.kind, StageKind::transfer);
  EXPECT_EQ(rec.tick, 0);
  ASSERT_EQ(s.tokens().size(), 1u);
  EXPECT_EQ(s.tokens()[0].at, "user.card_transfer");
}

TEST(Inject, AtCreateLeavesAToken) {
  auto s = micro_model();
  auto rec = exec::inject(s, "c0", data("x"));
  EXPECT_EQ(rec.kind, StageKind::create);
  EXPECT_EQ(s.tokens().size(), 1u);
}

TEST(Inject, AtProcessIsNotAnEntryPoint) {
  auto s = micro_model();
  try {
    exec::inject(s, "p", data("x"));
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("not an entry point"), std::string::npos);
  }
}

TEST(Step, ReleaseMovesToTransfer) {
  ModelBuilder b("m");
  b.machine("A", "A")
      .stage("c", StageKind::create, "A")
      .stage("r", StageKind::release, "A")
      .stage("t", StageKind::transfer, "A");
  b.chain({"c", "r", "t"});
  ExecState s(b.build(), {});
  exec::inject(s, "c", data("x"));
  exec::step(s);
  ASSERT_EQ(s.tokens().at(0).at, "r");
  auto recs = exec::step(s);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].stage, "t");
  EXPECT_EQ(recs[0].kind, StageKind::transfer);
  EXPECT_EQ(recs[0].via, "r->t");
  EXPECT_EQ(s.tick(), 2);
}

TEST(Step, IdleStateIsAFixpoint) {
  auto s = micro_model();
  auto recs = exec::step(s);
  EXPECT_TRUE(recs.empty());
  EXPECT_EQ(s.tick(), 0);
  EXPECT_FALSE(s.halted());
}

TEST(Step, TriggeredCreateActsInTheSameTickAsItsSource) {
  auto s = micro_model();
  exec::inject(s, "c0", data("x"));
  auto recs = exec::step(s);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].stage, "p");
  EXPECT_EQ(recs[0].kind, StageKind::process);
  EXPECT_EQ(recs[1].stage, "c1");
  EXPECT_EQ(recs[1].kind, StageKind::create);
  EXPECT_EQ(recs[0].tick, recs[1].tick);
  EXPECT_EQ(recs[1].via, "t");
}

TEST(Step, UnboundGuardFaultsNamingTheGuard) {
  ModelBuilder b("m");
  b.machine("M", "M").stage("c", StageKind::create, "M").stage("p", StageKind::process, "M");
  b.trigger("t", "c", "p", "mystery");
  ExecState s(b.build(), {});
  exec::inject(s, "c", data("x"));
  try {
    exec::step(s);
    FAIL();
  } catch (const ExecutionFault& e) {
    EXPECT_NE(std::string(e.what()).find("mystery"), std::string::npos);
  }
}

TEST(Step, AmbiguousUnroutedFanOutFaults) {
  ModelBuilder b("m");
  b.machine("M", "M")
      .stage("c", StageKind::create, "M")
      .stage("p", StageKind::process, "M")
      .stage("q", StageKind::process, "M");
  b.flow("c", "p").flow("c", "q");
  ExecState s(b.build(), {});
  exec::inject(s, "c", data("x"));
  EXPECT_THROW(exec::step(s), ExecutionFault);
}

TEST(Step, EffectRoutesAmongSeveralFlows) {
  ModelBuilder b("m");
  b.machine("M", "M")
      .stage("c", StageKind::create, "M")
      .stage("p", StageKind::process, "M")
      .stage("q", StageKind::process, "M")
      .stage("r", StageKind::process, "M");
  b.flow("c", "p").flow("p", "q").flow("p", "r");
  exec::HostBinding h;
  h.effects["c"] = [](exec::EffectContext& ctx) { ctx.emit(ctx.input(), "p"); };
  h.effects["p"] = [](exec::EffectContext& ctx) { ctx.emit(ctx.input(), ctx.input().number() > 0 ? "q" : "r"); };
  ExecState s(b.build(), std::move(h));
  exec::inject(s, "c", data("x", 1));
  auto trace = exec::run(s, 10);
  ASSERT_EQ(trace.size(), 2u);
  EXPECT_EQ(trace[1].stage, "q");
}

TEST(Step, HaltStopsFurtherSteps) {
  auto s = micro_model();
  exec::HostBinding h;
  h.guards["always"] = [](const ExecState&, const core::Thing&) { return true; };
  h.effects["p"] = [](exec::EffectContext& ctx) { ctx.halt(); };
  ExecState t(s.model(), std::move(h));
  exec::inject(t, "c0", data("x"));
  exec::step(t);
  EXPECT_TRUE(t.halted());
  EXPECT_THROW(exec::step(t), PreconditionError);
  EXPECT_THROW(exec::inject(t, "c0", data("y")), PreconditionError);
}

TEST(Step, StallRetriesWithoutRecording) {
  ModelBuilder b("m");
  b.machine("M", "M").storage("M.gate", "M").stage("c", StageKind::create, "M").stage("p", StageKind::process, "M");
  b.flow("c", "p");
  exec::HostBinding h;
  h.effects["p"] = [](exec::EffectContext& ctx) {
    if (ctx.storage("M.gate").empty()) return ctx.stall("closed");
    ctx.pass();
  };
  ExecState s(b.build(), std::move(h));
  exec::inject(s, "c", data("x"));
  EXPECT_TRUE(exec::step(s).empty());
  EXPECT_EQ(s.stalled(), "closed");
  EXPECT_EQ(s.tick(), 0);
  s.storage("M.gate").push_back(data("key"));
  auto recs = exec::step(s);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].stage, "p");
  EXPECT_FALSE(s.stalled());
}

TEST(Step, FaultIsRecordedAndFreezesTheState) {
  ModelBuilder b("m");
  b.machine("M", "M").stage("c", StageKind::create, "M").stage("p", StageKind::process, "M");
  b.flow("c", "p");
  exec::HostBinding h;
  h.effects["p"] = [](exec::EffectContext& ctx) { ctx.fault("broken"); };
  ExecState s(b.build(), std::move(h));
  exec::inject(s, "c", data("x"));
  auto recs = exec::step(s);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(s.fault(), "broken");
  EXPECT_THROW(exec::step(s), PreconditionError);
}

TEST(Step, TokensMoveInArrivalStageThingOrder) {
  ModelBuilder b("m");
  b.machine("M", "M")
      .stage("a", StageKind::create, "M")
      .stage("b", StageKind::create, "M")
      .stage("pa", StageKind::process, "M")
      .stage("pb", StageKind::process, "M");
  b.flow("a", "pa").flow("b", "pb");
  ExecState s(b.build(), {});
  exec::inject(s, "b", data("1"));
  exec::inject(s, "a", data("2"));
  exec::inject(s, "a", data("1"));
  auto recs = exec::step(s);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].stage, "pa");
  EXPECT_EQ(recs[0].thing.id, "1");
  EXPECT_EQ(recs[1].thing.id, "2");
  EXPECT_EQ(recs[2].stage, "pb");
}

TEST(Executable, EffectOnTransferIsRejected) {
  exec::HostBinding h;
  h.effects["a.transfer"] = [](exec::EffectContext&) {};
  EXPECT_THROW(ExecState(testkit::two_machine_chain(), std::move(h)), PreconditionError);
}

TEST(Executable, EffectOnUnknownStageIsRejected) {
  exec::HostBinding h;
  h.effects["ghost"] = [](exec::EffectContext&) {};
  EXPECT_THROW(ExecState(testkit::two_machine_chain(), std::move(h)), DefinitionError);
}

TEST(Run, ZeroTicksGivesAnEmptyTrace) {
  auto s = micro_model();
  exec::inject(s, "c0", data("x"));
  EXPECT_TRUE(exec::run(s, 0).empty());
  EXPECT_THROW(exec::run(s, -1), PreconditionError);
}

TEST(Run, ChainReachesQuiescence) {
  ExecState s(testkit::two_machine_chain(), {});
  exec::inject(s, "a.create", data("x"));
  auto trace = exec::run(s, 100);
  ASSERT_EQ(trace.size(), 5u);
  EXPECT_EQ(trace.back().stage, "b.process");
  EXPECT_TRUE(s.quiescent());
}

TEST(Run, AtmSufficientFundsEndsWithCashRelease) {
  auto run = fixtures::run_atm(1234, 200);
  ASSERT_FALSE(run.user_received.empty());
  EXPECT_EQ(run.user_received.back().kind, "cash");
  EXPECT_EQ(run.user_received.back().payload, core::Payload{std::int64_t{200}});
  EXPECT_EQ(run.balance_after, 300);
}

TEST(Run, AtmInsufficientFundsReturnsTheCardOnly) {
  auto run = fixtures::run_atm(1234, 900);
  ASSERT_FALSE(run.user_received.empty());
  EXPECT_EQ(run.user_received.back().kind, "card");
  for (const auto& t : run.user_received) EXPECT_NE(t.kind, "cash");
  EXPECT_EQ(run.balance_after, 500);
}

TEST(TraceJson, RoundTripsIncludingVia) {
  auto run = fixtures::run_atm(1234, 200);
  auto model = fixtures::atm_static_model();
  auto j = exec::trace_to_json(run.trace, &model);
  EXPECT_EQ(exec::trace_from_json(j), run.trace);
  EXPECT_TRUE(j[0].contains("paper_anchor"));
  EXPECT_THROW(exec::trace_from_json(nlohmann::json::object()), SchemaError);
}
