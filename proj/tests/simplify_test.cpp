#include <gtest/gtest.h>

#include <algorithm>

#include "test_models.hpp"
#include "tmw/core/simplify.hpp"
#include "tmw/lmc/tm_model.hpp"

using namespace tmw;
using core::ModelBuilder;
using core::StageKind;

TEST(Simplify, TwoMachineChainCollapsesToOneArc) {
  auto s = core::simplify(testkit::two_machine_chain());
  ASSERT_EQ(s.stages().size(), 2u);
  ASSERT_EQ(s.flows().size(), 1u);
  EXPECT_EQ(s.flows()[0].from, "a.create");
  EXPECT_EQ(s.flows()[0].to, "b.process");
  EXPECT_EQ(s.mode(), core::ModelMode::simplified);
  EXPECT_TRUE(core::validate(s).empty()) << core::describe(core::validate(s));
}

TEST(Simplify, CoreOnlyModelIsReturnedUnchanged) {
  ModelBuilder b("core");
  b.machine("A", "A").stage("c", StageKind::create, "A").stage("p", StageKind::process, "A").flow("c", "p");
  b.trigger("t", "p", "c");
  auto m = b.build();
  EXPECT_EQ(core::simplify(m), m);
}

TEST(Simplify, LmcStageCountDropsByTheRemovedKinds) {
  auto m = lmc::lmc_static_model();
  auto removed = std::count_if(m.stages().begin(), m.stages().end(),
                               [](const core::Stage& s) { return !core::is_core_kind(s.kind); });
  ASSERT_GT(removed, 0);
  auto s = core::simplify(m);
  EXPECT_EQ(s.stages().size(), m.stages().size() - static_cast<std::size_t>(removed));
  for (const auto& st : s.stages()) EXPECT_TRUE(core::is_core_kind(st.kind)) << st.id;
  EXPECT_TRUE(core::validate(s).empty()) << core::describe(core::validate(s));
}

TEST(Simplify, StoragesArePreserved) {
  auto m = lmc::lmc_static_model();
  EXPECT_EQ(core::simplify(m).storages(), m.storages());
}

TEST(Simplify, TriggersBetweenCoreStagesSurvive) {
  auto m = lmc::lmc_static_model();
  auto s = core::simplify(m);
  for (const auto& t : m.triggers()) {
    if (core::is_core_kind(m.stage(t.from).kind) && core::is_core_kind(m.stage(t.to).kind)) {
      EXPECT_NE(s.find_trigger(t.id), nullptr) << t.id;
    }
  }
}

TEST(Simplify, TriggerIntoReleaseIsReanchoredDownstream) {
  ModelBuilder b("m");
  b.machine("A", "A").machine("B", "B");
  b.stage("a.c", StageKind::create, "A")
      .stage("a.p", StageKind::process, "A")
      .stage("a.rel", StageKind::release, "A")
      .stage("a.t", StageKind::transfer, "A")
      .stage("b.t", StageKind::transfer, "B")
      .stage("b.r", StageKind::receive, "B")
      .stage("b.p", StageKind::process, "B");
  b.chain({"a.p", "a.rel", "a.t", "b.t", "b.r", "b.p"});
  b.flow("a.c", "a.rel");
  b.trigger("go", "a.c", "a.rel", "g");
  auto s = core::simplify(b.build());
  const auto* t = s.find_trigger("go");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->from, "a.c");
  EXPECT_EQ(t->to, "b.p");
  EXPECT_EQ(t->guard, "g");
}

TEST(Simplify, InvalidInputIsRejectedWithTheReport) {
  ModelBuilder b("bad");
  b.machine("A", "A").stage("c1", StageKind::create, "A").stage("c2", StageKind::create, "A").flow("c1", "c2");
  EXPECT_THROW(core::simplify(b.build()), core::ValidationError);
}
