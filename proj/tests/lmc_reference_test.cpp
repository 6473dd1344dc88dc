#include <gtest/gtest.h>

#include "tmw/lmc/machine.hpp"

using namespace tmw;
using lmc::LmcState;

namespace {

const std::vector<int> sample{901, 306, 901, 106, 902, 0, 0};

LmcState with(std::initializer_list<std::pair<int, int>> cells, int value = 0, bool flag = false) {
  LmcState s;
  for (auto [at, v] : cells) s.mailboxes[static_cast<std::size_t>(at)] = v;
  s.calculator = {value, flag};
  return s;
}

}  // namespace

TEST(Decode, SplitsHundreds) {
  EXPECT_EQ(lmc::decode(106), (lmc::Instruction{1, 6}));
  EXPECT_EQ(lmc::decode(0), (lmc::Instruction{0, 0}));
  EXPECT_EQ(lmc::decode(999), (lmc::Instruction{9, 99}));
  EXPECT_THROW(lmc::decode(1000), PreconditionError);
}

TEST(ReferenceStep, AddUsesTheOperandMailbox) {
  auto s = lmc::reference_step(with({{0, 106}, {6, 3}}, 5));
  EXPECT_EQ(s.pc, 1);
  EXPECT_EQ(s.calculator.value, 8);
  EXPECT_FALSE(s.calculator.negative);
}

TEST(ReferenceStep, HltHaltsAfterIncrementing) {
  auto s = lmc::reference_step(with({{0, 0}}));
  EXPECT_TRUE(s.halted);
  EXPECT_EQ(s.pc, 1);
  EXPECT_THROW(lmc::reference_step(s), PreconditionError);
}

TEST(ReferenceStep, NegativeSubtractionWrapsAndSetsTheFlag) {
  auto s = lmc::reference_step(with({{0, 206}, {6, 5}}, 3));
  EXPECT_EQ(s.calculator.value, 998);
  EXPECT_TRUE(s.calculator.negative);
  EXPECT_EQ(s.pc, 1);
}

TEST(ReferenceStep, NonNegativeSubtractionClearsTheFlag) {
  auto s = lmc::reference_step(with({{0, 206}, {6, 5}}, 5, true));
  EXPECT_EQ(s.calculator.value, 0);
  EXPECT_FALSE(s.calculator.negative);
}

TEST(ReferenceStep, AddWrapsAndLeavesTheFlag) {
  auto s = lmc::reference_step(with({{0, 106}, {6, 999}}, 5, true));
  EXPECT_EQ(s.calculator.value, 4);
  EXPECT_TRUE(s.calculator.negative);
}

TEST(ReferenceStep, StoreAndLoad) {
  auto s = lmc::reference_step(with({{0, 350}}, 42, true));
  EXPECT_EQ(s.mailboxes[50], 42);
  EXPECT_TRUE(s.calculator.negative);
  s = lmc::reference_step(with({{0, 550}, {50, 17}}, 1, true));
  EXPECT_EQ(s.calculator.value, 17);
  EXPECT_FALSE(s.calculator.negative);
}

TEST(ReferenceStep, Branches) {
  EXPECT_EQ(lmc::reference_step(with({{0, 642}})).pc, 42);
  EXPECT_EQ(lmc::reference_step(with({{0, 742}}, 0)).pc, 42);
  EXPECT_EQ(lmc::reference_step(with({{0, 742}}, 3)).pc, 1);
  // BRZ ignores the flag.
  EXPECT_EQ(lmc::reference_step(with({{0, 742}}, 0, true)).pc, 42);
  EXPECT_EQ(lmc::reference_step(with({{0, 842}}, 0)).pc, 42);
  EXPECT_EQ(lmc::reference_step(with({{0, 842}}, 998, true)).pc, 1);
}

TEST(ReferenceStep, PcWrapsAt100) {
  LmcState s;
  s.pc = 99;
  s.mailboxes[99] = 902;
  EXPECT_EQ(lmc::reference_step(s).pc, 0);
}

TEST(ReferenceStep, InputClearsTheFlagAndOutputAppends) {
  auto s = with({{0, 901}, {1, 902}}, 0, true);
  s.trays.input = {7, 8};
  s = lmc::reference_step(s);
  EXPECT_EQ(s.calculator.value, 7);
  EXPECT_FALSE(s.calculator.negative);
  EXPECT_EQ(s.trays.input, (std::deque<int>{8}));
  s = lmc::reference_step(s);
  EXPECT_EQ(s.trays.output, (std::vector<int>{7}));
}

TEST(ReferenceStep, InvalidInstructionsFaultWithPcAndCell) {
  try {
    lmc::reference_step(with({{0, 423}}));
    FAIL();
  } catch (const lmc::LmcFault& e) {
    EXPECT_STREQ(e.what(), "invalid instruction 423 at pc=0");
    EXPECT_EQ(e.cell(), 423);
  }
  EXPECT_THROW(lmc::reference_step(with({{0, 903}})), lmc::LmcFault);
  EXPECT_THROW(lmc::reference_step(with({{0, 900}})), lmc::LmcFault);
}

TEST(ReferenceStep, StarvedInputPausesOrErrors) {
  auto s = lmc::reference_step(with({{0, 901}}), lmc::StarvationPolicy::pause);
  EXPECT_TRUE(s.awaiting_input);
  EXPECT_EQ(s.pc, 0);
  try {
    lmc::reference_step(with({{0, 901}}), lmc::StarvationPolicy::error);
    FAIL();
  } catch (const lmc::InputExhausted& e) {
    EXPECT_STREQ(e.what(), "input exhausted at pc=0");
  }
}

TEST(RunReference, SampleProgramAddsItsInputs) {
  auto run = lmc::run_reference(lmc::initial_state(sample, std::vector<int>{5, 7}), 100);
  EXPECT_EQ(run.stop, lmc::StopReason::halted);
  EXPECT_EQ(run.final_state.trays.output, (std::vector<int>{12}));
  EXPECT_EQ(run.final_state.mailboxes[6], 5);
  EXPECT_EQ(run.snapshots.size(), 7u);
}

TEST(RunReference, ZeroStepsKeepsOnlyTheInitialState) {
  auto init = lmc::initial_state(sample);
  auto run = lmc::run_reference(init, 0);
  ASSERT_EQ(run.snapshots.size(), 1u);
  EXPECT_EQ(run.snapshots[0], init);
  EXPECT_EQ(run.stop, lmc::StopReason::step_limit);
}

TEST(RunReference, StarvedInputStopsAwaiting) {
  auto run = lmc::run_reference(lmc::initial_state(std::vector<int>{901}), 10);
  EXPECT_EQ(run.stop, lmc::StopReason::awaiting_input);
  EXPECT_TRUE(run.final_state.awaiting_input);
  EXPECT_EQ(run.final_state.pc, 0);
  EXPECT_EQ(run.snapshots.size(), 2u);
}

TEST(RunReference, FaultsPropagate) {
  EXPECT_THROW(lmc::run_reference(lmc::initial_state(std::vector<int>{400}), 10), lmc::LmcFault);
}

TEST(InitialState, RejectsOutOfRangeCellsAndInputs) {
  EXPECT_THROW(lmc::initial_state(std::vector<int>(101, 0)), PreconditionError);
  EXPECT_THROW(lmc::initial_state(std::vector<int>{1000}), PreconditionError);
  EXPECT_THROW(lmc::initial_state(std::vector<int>{0}, std::vector<int>{-1}), PreconditionError);
}

TEST(Snapshot, JsonRoundTrip) {
  auto run = lmc::run_reference(lmc::initial_state(sample, std::vector<int>{5, 7}), 3);
  for (const auto& s : run.snapshots) EXPECT_EQ(lmc::snapshot_from_json(lmc::snapshot_to_json(s)), s);
  auto j = lmc::snapshot_to_json(run.final_state);
  EXPECT_EQ(j.at("mailboxes").size(), 100u);
  for (const char* key : {"pc", "value", "flag", "halted", "awaiting_input", "input", "output"}) EXPECT_TRUE(j.contains(key));
}

TEST(Snapshot, FirstDifferenceNamesTheField) {
  LmcState a, b;
  EXPECT_EQ(lmc::first_difference(a, b), "");
  b.mailboxes[7] = 1;
  EXPECT_EQ(lmc::first_difference(a, b), "mailbox 7: 0 vs 1");
}
