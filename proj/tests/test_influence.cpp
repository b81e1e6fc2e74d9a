#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "helpers.hpp"
#include "refform/influence.hpp"
#include "refform/mealy.hpp"
#include "refform/verify.hpp"

using namespace refform;

namespace {

ReferringForm truncated(const ReferringForm& form, TimeStep horizon) {
  ReferringForm out;
  out.horizon = horizon;
  out.past.assign(form.past.begin(), form.past.begin() + horizon);
  out.current.assign(form.current.begin(), form.current.begin() + horizon);
  return out;
}

Schedule truncated(const Schedule& s, TimeStep horizon) {
  Schedule out;
  out.horizon = horizon;
  for (const auto& row : s.latch)
    out.latch.emplace_back(row.begin(), row.begin() + horizon);
  for (const auto& row : s.choice)
    out.choice.emplace_back(row.begin(), row.begin() + horizon);
  return out;
}

}  // namespace

TEST_CASE("dff refers to the input at the latest edge") {
  Circuit c = testutil::load_circuit("circuits/dff.rfc");
  ReferringForm form = restriction_map(c, schedule_from_clocks(c, 9));
  std::vector<RefSet> expected{
      RefSet{},         RefSet{{"I", 0}}, RefSet{{"I", 0}},
      RefSet{{"I", 0}}, RefSet{{"I", 0}}, RefSet{{"I", 4}},
      RefSet{{"I", 4}}, RefSet{{"I", 4}}, RefSet{{"I", 4}}};
  CHECK(form.past == expected);
  for (TimeStep t = 0; t < 9; ++t) CHECK(form.current[t].empty());
}

TEST_CASE("a stateless circuit refers to nothing past") {
  Circuit c = testutil::load_circuit("circuits/passthrough.rfc");
  ReferringForm form = restriction_map(c, schedule_from_clocks(c, 4));
  for (TimeStep t = 0; t < 4; ++t) {
    CHECK(form.past[t].empty());
    CHECK(form.current[t] == std::vector<std::string>{"I"});
  }
}

TEST_CASE("the feedback loop accumulates one occurrence per edge") {
  Circuit c = testutil::load_circuit("circuits/sync.rfc");
  ReferringForm form = restriction_map(c, schedule_from_clocks(c, 7));
  std::vector<RefSet> expected{
      RefSet{},
      RefSet{{"I", 0}},
      RefSet{{"I", 0}},
      RefSet{{"I", 0}, {"I", 2}},
      RefSet{{"I", 0}, {"I", 2}},
      RefSet{{"I", 0}, {"I", 2}, {"I", 4}},
      RefSet{{"I", 0}, {"I", 2}, {"I", 4}}};
  CHECK(form.past == expected);
}

TEST_CASE("two clock domains deliver the newest latched occurrence per tick") {
  Circuit c = testutil::load_circuit("circuits/twoclock.rfc");
  // c1 edges at 0,3,6,9; c2 edges at 2,6,10.
  ReferringForm form = restriction_map(c, schedule_from_clocks(c, 12));
  CHECK(form.past[2] == RefSet{});
  CHECK(form.past[3] == RefSet{{"I", 0}});
  CHECK(form.past[6] == RefSet{{"I", 0}});
  // The tick at 6 reads A's pre-update contents: the input latched at 3.
  CHECK(form.past[7] == RefSet{{"I", 0}, {"I", 3}});
  CHECK(form.past[10] == RefSet{{"I", 0}, {"I", 3}});
  CHECK(form.past[11] == RefSet{{"I", 0}, {"I", 3}, {"I", 9}});
}

TEST_CASE("ff contents follow the latch rule") {
  Circuit dff = testutil::load_circuit("circuits/dff.rfc");
  auto trace = ff_contents_trace(dff, schedule_from_clocks(dff, 9));
  CHECK(trace[0][0] == RefSet{{"I", 0}});
  CHECK(trace[3][0] == RefSet{{"I", 0}});
  CHECK(trace[4][0] == RefSet{{"I", 4}});

  // All-hold: nothing is ever latched.
  auto r = parse(
      "circuit t { input I; clock c edges []; ff F clock c from {I}; output "
      "from {F}; }");
  REQUIRE(r.ok());
  auto held = ff_contents_trace(*r.circuit, schedule_from_clocks(*r.circuit, 5));
  for (const auto& step : held) CHECK(step[0].empty());
  ReferringForm form =
      restriction_map(*r.circuit, schedule_from_clocks(*r.circuit, 5));
  for (const auto& past : form.past) CHECK(past.empty());

  // After the first c2 tick, B holds exactly A's pre-update contents.
  Circuit two = testutil::load_circuit("circuits/twoclock.rfc");
  auto two_trace = ff_contents_trace(two, schedule_from_clocks(two, 4));
  CHECK(two_trace[2][1] == two_trace[1][0]);
}

TEST_CASE("restriction_map rejects inconsistent schedules") {
  Circuit c = testutil::load_circuit("circuits/dff.rfc");
  Schedule s = schedule_from_clocks(c, 4);
  s.latch[0][1] = 1;  // disagrees with the clock
  CHECK_THROWS_AS(restriction_map(c, s), Error);
  Schedule wrong = schedule_from_clocks(c, 4);
  wrong.latch.emplace_back(4, 0);
  CHECK_THROWS_AS(restriction_map(c, wrong), Error);
}

TEST_CASE("produced forms satisfy the causality invariants") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 150; ++i) {
    Circuit c = testutil::random_circuit(rng);
    TimeStep horizon = 1 + static_cast<int>(testutil::below(rng, 7));
    Schedule s = testutil::random_schedule(rng, c, horizon);
    ReferringForm form = restriction_map(c, s);
    CHECK_NOTHROW(validate_form(form));
    auto trace = ff_contents_trace(c, s);
    for (TimeStep t = 0; t < horizon; ++t)
      for (const auto& contents : trace[t])
        for (const auto& occ : contents.occurrences()) CHECK(occ.time <= t);
    // The form is reproducible from the trace plus the output choices.
    const int out_sel = c.selector_count() - 1;
    for (TimeStep t = 1; t < horizon; ++t) {
      RefSet expected;
      const SourceSet& srcs =
          c.output.alternatives[s.choice[out_sel][t]];
      for (const Source& src : srcs)
        if (src.kind == SourceKind::FF) expected.unite(trace[t - 1][src.index]);
      CHECK(form.past[t] == expected);
    }
  }
}

TEST_CASE("horizon extension is prefix-deterministic") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    Circuit c = testutil::random_circuit(rng);
    Schedule s = testutil::random_schedule(rng, c, 8);
    ReferringForm full = restriction_map(c, s);
    TimeStep cut = 1 + static_cast<int>(testutil::below(rng, 7));
    CHECK(restriction_map(c, truncated(s, cut)) == truncated(full, cut));
  }
}

TEST_CASE("an all-hold suffix freezes the form") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    Circuit c = testutil::random_circuit(rng);
    const TimeStep horizon = 8, suffix = 4;
    Schedule s = testutil::random_schedule(rng, c, horizon);
    for (auto& row : s.latch)
      for (TimeStep t = suffix; t < horizon; ++t) row[t] = 0;
    for (auto& row : s.choice)
      for (TimeStep t = suffix; t < horizon; ++t) row[t] = row[suffix];
    bool clocked_edge_in_suffix = false;
    for (const auto& ff : c.ffs)
      if (!is_free(ff.clock))
        for (TimeStep t = suffix; t < horizon; ++t)
          if (has_edge(ff.clock, t)) clocked_edge_in_suffix = true;
    if (clocked_edge_in_suffix) continue;  // schedule would be inconsistent
    ReferringForm form = restriction_map(c, s);
    for (TimeStep t = suffix + 1; t < horizon; ++t)
      CHECK(form.past[t] == form.past[suffix]);
  }
}

TEST_CASE("all_referring_forms of a fully clocked circuit is a singleton") {
  Circuit c = testutil::load_circuit("circuits/dff.rfc");
  auto forms = all_referring_forms(c, 9);
  REQUIRE(forms.size() == 1);
  CHECK(forms[0] == restriction_map(c, schedule_from_clocks(c, 9)));
}

TEST_CASE("one free flip-flop at horizon 2 yields at most 4 forms") {
  auto r = parse(
      "circuit t { input I; clock c free; ff F clock c from {I}; output from "
      "{F}; }");
  REQUIRE(r.ok());
  ScheduleSpace space(*r.circuit, 2);
  CHECK(space.cardinality() == 4);
  auto forms = all_referring_forms(*r.circuit, 2);
  CHECK(forms.size() <= 4);
  // A latch at step 1 is never visible within the horizon, so exactly the
  // all-empty form and the latched-at-0 form remain.
  CHECK(forms.size() == 2);
}

TEST_CASE("schedule enumeration order is deterministic") {
  auto r = parse(
      "circuit t { input I; clock c free; ff F clock c from {I}; output from "
      "{F}; }");
  REQUIRE(r.ok());
  ScheduleSpace space(*r.circuit, 2);
  CHECK(space.at(0).latch[0] == std::vector<std::uint8_t>{0, 0});
  CHECK(space.at(1).latch[0] == std::vector<std::uint8_t>{1, 0});
  CHECK(space.at(2).latch[0] == std::vector<std::uint8_t>{0, 1});
  CHECK(space.at(3).latch[0] == std::vector<std::uint8_t>{1, 1});
  CHECK_THROWS_AS(space.at(4), Error);
}

TEST_CASE("enumeration refuses to exceed its budget") {
  Circuit selmem = testutil::load_circuit("circuits/selmem.rfc");
  try {
    all_referring_forms(selmem, 10, /*budget=*/1024);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.cardinality == (1ull << 30));
  }
}

TEST_CASE("the selective-memory space at horizon 8 contains conflicting forms") {
  auto conflict = find_selective_conflict(8);
  REQUIRE(conflict.has_value());
  CHECK(conflict->form1.past[conflict->n] ==
        conflict->form2.past[conflict->n + 7]);
  CHECK(conflict->form1.past[conflict->n + 3] ==
        conflict->form2.past[conflict->n + 3]);
  CHECK_FALSE(conflict->form1.past[conflict->n] ==
              conflict->form1.past[conflict->n + 3]);
}

TEST_CASE("horizon 1 is handled throughout") {
  Circuit dff = testutil::load_circuit("circuits/dff.rfc");
  ReferringForm form = restriction_map(dff, schedule_from_clocks(dff, 1));
  CHECK(form.horizon == 1);
  CHECK(form.past[0].empty());
  auto forms = all_referring_forms(dff, 1);
  CHECK(forms.size() == 1);
  CHECK(check_time_preservation(forms).preserving);

  Circuit pass = testutil::load_circuit("circuits/passthrough.rfc");
  ReferringForm p = restriction_map(pass, schedule_from_clocks(pass, 1));
  CHECK(p.current[0] == std::vector<std::string>{"I"});
}

TEST_CASE("oracle agreement on a deterministic sample") {
  std::mt19937_64 rng(41);
  auto circuits = enumerate_mcd_circuits(2);
  for (int k = 0; k < 20; ++k) {
    const Circuit& c = circuits[testutil::below(rng, circuits.size())];
    ScheduleSpace space(c, 4);
    Schedule s = space.at(testutil::below(rng, space.cardinality()));
    CHECK(semantic_influence(c, s) == restriction_map(c, s));
  }
}
