#include <gtest/gtest.h>

#include "tmw/events/events.hpp"
#include "tmw/fixtures/atm.hpp"
#include "tmw/lmc/assembler.hpp"
#include "tmw/lmc/tm_engine.hpp"

using namespace tmw;
using events::EventOccurrence;

namespace {

std::vector<std::string> ids(const std::vector<EventOccurrence>& occ) {
  std::vector<std::string> out;
  for (const auto& o : occ) out.push_back(o.event);
  return out;
}

std::vector<EventOccurrence> seq(std::initializer_list<const char*> names) {
  std::vector<EventOccurrence> out;
  exec::Tick t = 0;
  for (const char* n : names) out.push_back({n, t, t}), ++t;
  return out;
}

exec::ActionRecord rec(exec::Tick tick, const char* stage, std::optional<std::string> via = std::nullopt) {
  return exec::ActionRecord{tick, stage, core::StageKind::process, core::Thing{"x", "data", std::int64_t{0}}, via};
}

}  // namespace

TEST(Detect, AtmSufficientRunYieldsE1ToE10ThenE12) {
  auto run = fixtures::run_atm(1234, 100);
  EXPECT_EQ(ids(run.occurrences), (std::vector<std::string>{"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9",
                                                             "E10", "E12"}));
}

TEST(Detect, AtmInsufficientRunEndsInE11) {
  auto run = fixtures::run_atm(1234, 501);
  ASSERT_EQ(run.occurrences.size(), 11u);
  EXPECT_EQ(run.occurrences.back().event, "E11");
}

TEST(Detect, EmptyTraceGivesNothing) { EXPECT_TRUE(events::detect_events({}, lmc::lmc_event_defs()).empty()); }

TEST(Detect, OneLmcFetchStartsWithE3ToE6) {
  lmc::TmMachine m(lmc::LmcState{});
  m.step_instruction();
  auto got = ids(m.occurrences());
  ASSERT_GE(got.size(), 6u);
  EXPECT_EQ(std::vector<std::string>(got.begin(), got.begin() + 6),
            (std::vector<std::string>{"E1", "E2", "E3", "E4", "E5", "E6"}));
}

TEST(Detect, ConjunctionResetsAfterEachOccurrence) {
  std::vector<events::EventDef> defs{{"E1", "pair", {"a", "b"}, std::nullopt, ""}};
  exec::ActionTrace trace{rec(1, "a"), rec(2, "a"), rec(3, "b"), rec(4, "b"), rec(5, "a")};
  auto occ = events::detect_events(trace, defs);
  ASSERT_EQ(occ.size(), 2u);
  EXPECT_EQ(occ[0], (EventOccurrence{"E1", 2, 3}));
  EXPECT_EQ(occ[1], (EventOccurrence{"E1", 4, 5}));
}

TEST(Detect, ArcIdsMatchThroughVia) {
  std::vector<events::EventDef> defs{{"E1", "arc", {"a->b"}, std::nullopt, ""}};
  exec::ActionTrace trace{rec(1, "b"), rec(2, "b", "a->b")};
  auto occ = events::detect_events(trace, defs);
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0].end, 2);
}

TEST(Detect, TiesAreOrderedByNaturalEventId) {
  std::vector<events::EventDef> defs{{"E10", "", {"a"}, std::nullopt, ""}, {"E9", "", {"a"}, std::nullopt, ""}};
  auto occ = events::detect_events({rec(1, "a")}, defs);
  EXPECT_EQ(ids(occ), (std::vector<std::string>{"E9", "E10"}));
}

TEST(Detect, RecordsOutsideRegionsChangeNothing) {
  auto run = fixtures::run_atm(1234, 100);
  auto noisy = run.trace;
  noisy.insert(noisy.begin() + 3, rec(noisy[3].tick, "elsewhere"));
  noisy.push_back(rec(noisy.back().tick, "nowhere"));
  EXPECT_EQ(events::detect_events(noisy, fixtures::atm_event_defs()), run.occurrences);
}

TEST(Detect, UnknownRegionIdIsADefinitionError) {
  std::vector<events::EventDef> defs{{"E1", "", {"no.such.stage"}, std::nullopt, ""}};
  EXPECT_THROW(events::detect_events({}, defs, fixtures::atm_static_model()), DefinitionError);
  std::vector<events::EventDef> empty_region{{"E1", "", {}, std::nullopt, ""}};
  EXPECT_THROW(events::check_definitions(empty_region, fixtures::atm_static_model()), DefinitionError);
}

TEST(Detect, OccurrenceIntervalsAreOrdered) {
  auto run = lmc::tm_run(std::vector<int>{901, 306, 901, 106, 902, 0, 0}, std::vector<int>{5, 7});
  for (const auto& o : run.occurrences) EXPECT_LE(o.start, o.end);
}

TEST(Conforms, AtmInsufficientSequenceConforms) {
  auto v = events::conforms(seq({"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E11"}),
                            fixtures::atm_behavioral_model());
  EXPECT_TRUE(v);
}

TEST(Conforms, SingleStartNodeConforms) { EXPECT_TRUE(events::conforms(seq({"E1"}), fixtures::atm_behavioral_model())); }

TEST(Conforms, SkippingE2IsAViolationAtIndex1) {
  auto v = events::conforms(seq({"E1", "E3"}), fixtures::atm_behavioral_model());
  EXPECT_FALSE(v);
  EXPECT_EQ(v.index, 1u);
  EXPECT_EQ(v.pair, (events::Edge{"E1", "E3"}));
}

TEST(Conforms, WrongStartIsAViolationAtIndex0) {
  auto v = events::conforms(seq({"E2"}), fixtures::atm_behavioral_model());
  EXPECT_FALSE(v);
  EXPECT_EQ(v.index, 0u);
}

TEST(Conforms, UnknownEventIsADefinitionError) {
  EXPECT_THROW(events::conforms(seq({"E99"}), fixtures::atm_behavioral_model()), DefinitionError);
  events::BehavioralModel bad{{"A"}, {{"A", "B"}}, {"A"}};
  EXPECT_THROW(events::conforms({}, bad), DefinitionError);
}

TEST(Coverage, BothAtmBranchesCoverAllTwelve) {
  auto a = fixtures::run_atm(1234, 100).occurrences;
  auto b = fixtures::run_atm(1234, 1000).occurrences;
  a.insert(a.end(), b.begin(), b.end());
  EXPECT_TRUE(events::coverage(a, fixtures::atm_event_defs()).empty());
}

TEST(Coverage, NoOccurrencesMissesEverything) {
  EXPECT_EQ(events::coverage({}, fixtures::atm_event_defs()).size(), 12u);
}

TEST(Coverage, SampleProgramCoversItsOpcodes) {
  auto run = lmc::tm_run(lmc::assemble_text("IN\nSTO A\nIN\nADD A\nOUT\nHLT\nA DAT\n").cells, std::vector<int>{5, 7});
  auto missing = events::coverage(run.occurrences, lmc::lmc_event_defs());
  for (const char* e : {"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E10", "E16", "E29", "E30", "E31", "E32"}) {
    EXPECT_EQ(std::count(missing.begin(), missing.end(), e), 0) << e;
  }
}

TEST(NaturalLess, ComparesTrailingNumbers) {
  EXPECT_TRUE(events::natural_less("E9", "E10"));
  EXPECT_FALSE(events::natural_less("E10", "E9"));
  EXPECT_TRUE(events::natural_less("A5", "B1"));
  EXPECT_FALSE(events::natural_less("E3", "E3"));
}

TEST(EventJson, DefinitionsOccurrencesAndBehaviorRoundTrip) {
  auto defs = lmc::lmc_event_defs();
  EXPECT_EQ(events::defs_from_json(events::to_json(defs)), defs);
  auto occ = fixtures::run_atm(1234, 100).occurrences;
  EXPECT_EQ(events::occurrences_from_json(events::to_json(occ)), occ);
  auto b = lmc::lmc_behavioral_model();
  EXPECT_EQ(events::behavior_from_json(events::to_json(b)), b);
  EXPECT_THROW(events::behavior_from_json(nlohmann::json{{"nodes", {"A"}}, {"edges", {{"A"}}}, {"start", {"A"}}}),
               SchemaError);
}

TEST(BehaviorDot, MarksStartNodes) {
  auto dot = events::behavior_to_dot(fixtures::atm_behavioral_model());
  EXPECT_NE(dot.find("\"E1\" [shape=doublecircle]"), std::string::npos);
  EXPECT_NE(dot.find("\"E10\" -> \"E12\""), std::string::npos);
}
