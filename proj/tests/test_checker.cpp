#include <doctest.h>

#include <random>

#include "experiments.hpp"
#include "gsm/cardiac.hpp"
#include "gsm/checker/suite.hpp"
#include "reference_checker.hpp"

using namespace gsm;
using namespace gsm::checker;

namespace {

const StateSpace& cardiac_space() {
  static const StateSpace space = build_state_space(load_cardiac_pack());
  return space;
}

Verdict check_text(const StateSpace& space, const std::string& text, StutterMode stutter = StutterMode::Auto) {
  CheckOptions o;
  o.stutter = stutter;
  return check(space, compile_property(text, *space.pack), o);
}

std::shared_ptr<const CompiledPack> small_pack(const std::string& text) {
  return std::make_shared<const CompiledPack>(compile_source(text));
}

// One process that can only move from Lo to Hi, never back.
const char* kOneWay = R"(pack W
automaton P {
  input x: int range 0..1 step 1
  initial Lo
  state Lo
  state Hi
  trans Lo -> Hi when x == 1
}
guidelines {
  (*) -> "g"
}
)";

}  // namespace

TEST_CASE("property syntax and name resolution") {
  const CompiledPack& pack = *load_cardiac_pack();

  PropertyAst p7 = compile_property("A[] BGI_Physician.MetabolicAcidosis imply Physician_BGI_State == METABOLIC_ACIDOSIS", pack);
  CHECK(p7.quantifier == Quantifier::AG);
  REQUIRE(p7.body.kind == PropExpr::Kind::Imply);
  const PropExpr& loc = p7.body.args[0];
  CHECK(loc.kind == PropExpr::Kind::Loc);
  CHECK(loc.physician);
  CHECK(loc.process == 1);
  const PropExpr& cmp = p7.body.args[1];
  CHECK(cmp.lhs.kind == Operand::Kind::Local);
  CHECK(cmp.lhs.physician);
  CHECK(cmp.rhs.kind == Operand::Kind::Const);

  PropertyAst p8 = compile_property("A<> BGI_BestPractice.MetabolicAcidosis imply (MetabolicAcidosis_DeviationCounter > 0)", pack);
  CHECK(p8.quantifier == Quantifier::AF);
  const PropExpr& counter = p8.body.args[1];
  CHECK(counter.lhs.kind == Operand::Kind::Counter);
  CHECK(counter.lhs.process == 1);
  CHECK(counter.lhs.only_in == pack.organs[1].state_index("MetabolicAcidosis"));
  CHECK(max_counter_constant(p8.body) == 0);

  // Aliases and the `XBP` spelling resolve to the organ automaton.
  PropertyAst p2 = compile_property("E<> ArrhythmiaBP.VentricularFibrillation", pack);
  CHECK(p2.body.state_index == *pack.organs[0].state_index("VFib"));
  CHECK_FALSE(p2.body.physician);

  PropertyAst dl = compile_property("A[] not deadlock", pack);
  CHECK(processes_read(dl.body, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(processes_read(compile_property("E<> ph < 7.0 && BGI.counter >= 1", pack).body, 3) == std::vector<std::size_t>{1});

  CHECK_THROWS_AS(compile_property("A[] BGI.Nowhere", pack), PropertyError);
  CHECK_THROWS_AS(compile_property("A[] lactate > 2", pack), PropertyError);
  CHECK_THROWS_AS(compile_property("A[] rhythm > 2", pack), PropertyError);
  CHECK_THROWS_AS(compile_property("E<> (BGI.Init", pack), PropertyError);
  CHECK_THROWS_AS(compile_property("X[] true", pack), PropertyError);
  try {
    compile_property("A[] ph < 7.0 && bogus == 1", pack);
    FAIL("expected PropertyError");
  } catch (const PropertyError& e) {
    CHECK(e.pos.column == 17);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("preconditions") {
  SUBCASE("counter constants must be below the cap") {
    SpaceOptions o;
    o.counter_cap = 2;
    const StateSpace space = build_state_space(small_pack(kOneWay), o);
    CHECK_NOTHROW(check_text(space, "E<> P.counter == 1"));
    CHECK_THROWS_AS(check_text(space, "E<> P.counter == 2"), PreconditionError);
    CHECK_THROWS_AS(check_text(space, "A[] P_DeviationCounter < 3"), PreconditionError);
  }
  SUBCASE("inputs need a finite domain") {
    const auto pack = small_pack("pack U\nautomaton P {\n  input x: int\n  initial A\n  state A\n  state B\n"
                                 "  trans A -> B when x > 3\n}\nguidelines {\n  (*) -> \"g\"\n}\n");
    CHECK_THROWS_AS(build_state_space(pack), PreconditionError);
  }
  SUBCASE("node cap") {
    SpaceOptions o;
    o.node_cap = 100;
    CHECK_THROWS_AS(build_state_space(load_cardiac_pack(), o), ResourceError);
  }
}

TEST_CASE("shipped property suite and baselines") {
  const StateSpace& space = cardiac_space();
  CHECK(space.components.size() == 3);
  CHECK(space.total_nodes() == 2001);
  CHECK(space.total_edges() == 24089);
  CHECK(space.components[space.component_of[0]].nodes.size() == 1381);
  CHECK(space.components[space.component_of[1]].nodes.size() == 283);
  CHECK(space.components[space.component_of[2]].nodes.size() == 337);

  const SuiteReport report = check_suite(space, cardiac_properties());
  CHECK(report.errors.empty());
  REQUIRE(report.verdicts.size() == 8);
  CHECK(report.all_satisfied());
  for (const auto& v : report.verdicts) {
    CAPTURE(v.id);
    CHECK(v.effective());
  }
  // A<> over an implication also carries the A[] reading; the suite is judged on it.
  for (int i : {2, 3, 5, 7}) {
    REQUIRE(report.verdicts[i].invariant_reading);
    CHECK(report.verdicts[i].invariant_reading->satisfied);
  }
  CHECK(report.verdicts[0].method == "decomposed");
  CHECK(report.verdicts[0].nodes_visited == 2001);
  CHECK(report.verdicts[1].method == "component");

  const auto j = to_json(report, space, false);
  CHECK(j.at("model") == "CardiacArrest");
  CHECK(j.at("space").at("nodes") == 2001);
  CHECK(j.at("space").at("components").size() == 3);
  CHECK(j.at("properties").size() == 8);
  CHECK(j.at("properties")[2].at("invariant_reading").at("result") == "satisfied");
  CHECK(j.at("properties")[1].at("trace").at("steps").size() > 0);
  CHECK_FALSE(j.at("properties")[0].contains("time_ms"));
  CHECK(j.at("all_satisfied") == true);
  // Deterministic apart from timings.
  CHECK(to_json(check_suite(space, cardiac_properties()), space, false) == j);
}

TEST_CASE("suite files") {
  const StateSpace& space = cardiac_space();
  SUBCASE("one bad line does not stop the others") {
    const std::string text = std::string(cardiac_properties()) + "P9: A[] BGI.Nowhere\nnot a property\n";
    const SuiteReport r = check_suite(space, text);
    CHECK(r.verdicts.size() == 8);
    REQUIRE(r.errors.size() == 2);
    CHECK(r.errors[0].id == "P9");
    CHECK(r.errors[0].line == 12);
    CHECK(r.errors[0].column > 5);
    CHECK(r.errors[1].id.empty());
    CHECK(r.errors[1].line == 13);
    CHECK_FALSE(r.all_satisfied());
  }
  SUBCASE("seven properties and a syntax error") {
    std::string text;
    const PropertyFile f = parse_property_file(cardiac_properties());
    for (std::size_t i = 0; i < 7; ++i) text += f.entries[i].id + ": " + f.entries[i].formula + "\n";
    text += "P8: A<> (BGI.Init &&\n";
    const SuiteReport r = check_suite(space, text);
    CHECK(r.verdicts.size() == 7);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].id == "P8");
    CHECK(r.errors[0].line == 8);
  }
  SUBCASE("duplicates and empty files") {
    const PropertyFile f = parse_property_file("# only a comment\n\nA: E<> true\nA: A[] true\nB:\n");
    CHECK(f.entries.size() == 1);
    CHECK(f.errors.size() == 2);
    const SuiteReport empty = check_suite(space, "");
    CHECK(empty.verdicts.empty());
    CHECK(empty.errors.empty());
    CHECK(empty.all_satisfied());
  }
}

TEST_CASE("counterexamples and witnesses") {
  SpaceOptions o;
  o.counter_cap = 2;
  const StateSpace space = build_state_space(small_pack(kOneWay), o);
  testing::ReferenceModel ref(space.pack, 2);

  SUBCASE("E<> witness reaches the state") {
    const Verdict v = check_text(space, "E<> P.Hi");
    CHECK(v.satisfied);
    const auto path = ref.replay(v.trace.labels());
    REQUIRE(path);
    CHECK(ref.node(path->back()).organs[0].location == 1);
  }
  SUBCASE("A<> fails on a lasso that stays away") {
    const Verdict v = check_text(space, "A<> P.Hi");
    CHECK_FALSE(v.satisfied);
    REQUIRE(v.trace.loop_start);
    const auto path = ref.replay(v.trace.labels());
    REQUIRE(path);
    CHECK((*path)[*v.trace.loop_start] == path->back());
    for (std::size_t n : *path) CHECK(ref.node(n).organs[0].location == 0);
  }
  SUBCASE("A[] counterexample ends in a violating node") {
    const Verdict v = check_text(space, "A[] P.Lo");
    CHECK_FALSE(v.satisfied);
    const auto path = ref.replay(v.trace.labels());
    REQUIRE(path);
    CHECK(ref.node(path->back()).organs[0].location == 1);
  }
  SUBCASE("deadlock depends on stutter") {
    CHECK(check_text(space, "A[] not deadlock", StutterMode::Off).satisfied);
    CHECK_FALSE(check_text(space, "E<> deadlock", StutterMode::Off).satisfied);
    CHECK_FALSE(check_text(space, "E<> deadlock", StutterMode::On).satisfied);
  }
  SUBCASE("divergence is reachable and counted") {
    CHECK(check_text(space, "E<> P.Hi && P_Physician.Lo && P.counter == 1").satisfied);
    CHECK(check_text(space, "A[] P.Hi && P_Physician.Lo imply P.counter > 0").satisfied);
  }
}

TEST_CASE("quantifier dualities on random formulas") {
  std::mt19937 rng(21);
  testing::RandomPackOptions po;
  po.max_automata = 2;
  po.max_states = 3;
  po.max_domain = 2;
  po.max_transitions = 4;
  int checked = 0;
  while (checked < 120) {
    const auto pack = small_pack(testing::random_pack_text(rng, po));
    SpaceOptions so;
    so.counter_cap = 2;
    StateSpace space;
    try {
      space = build_state_space(pack, so);
    } catch (const ResourceError&) {
      continue;
    }
    for (int k = 0; k < 10; ++k, ++checked) {
      const std::string phi = testing::random_property(rng, *pack, 2).substr(4);
      CAPTURE(phi);
      for (auto mode : {StutterMode::On, StutterMode::Off}) {
        CHECK(check_text(space, "A[] " + phi, mode).satisfied == !check_text(space, "E<> !(" + phi + ")", mode).satisfied);
        CHECK(check_text(space, "A<> " + phi, mode).satisfied == !check_text(space, "E[] !(" + phi + ")", mode).satisfied);
      }
    }
  }
}

TEST_CASE("verdicts match the brute-force reference") {
  testing::OracleOptions o;
  o.packs = 12;
  o.properties_per_pack = 8;
  o.seed = 99;
  const testing::OracleReport r = testing::compare_with_reference(o);
  CHECK(r.packs == 12);
  CHECK(r.mismatches == 0);
  CHECK(r.bad_traces == 0);
  CHECK(r.satisfied > 0);
  CHECK(r.satisfied < r.verdicts);
  if (!r.first_problem.empty()) MESSAGE(r.first_problem);
}

TEST_CASE("checker edges replay on the runtime") {
  // Random walks over the blood gas component, each edge driven through the
  // session runtime; the runtime's view of BGI must match the target node.
  const StateSpace& space = cardiac_space();
  const std::size_t p = 1;
  const Component& c = space.components[space.component_of[p]];
  const std::size_t slot = c.slot(p);
  const int cap = space.options.counter_cap;

  Valuation first;
  for (const auto& a : space.pack->source.automata) {
    for (const auto& in : a.inputs) first[in.name] = checker_domain(space.pack->source, in.name, false).front();
  }

  std::mt19937 rng(4);
  int steps = 0, ticks = 0, physician = 0;
  for (int walk = 0; walk < 60; ++walk) {
    service::Runtime rt(space.pack);
    std::uint32_t node = 0;
    Millis t = 0;
    for (int i = 0; i < 40 && !c.edges[node].empty(); ++i) {
      const auto& out = c.edges[node];
      const Edge e = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
      const EdgeLabel& l = c.labels[e.label];
      switch (l.kind) {
        case EdgeLabel::Kind::Snapshot: {
          Snapshot s{++t, {{l.name, l.value}}};
          if (!rt.engine().has_snapshot()) {
            s.values = first;
            s.values.insert_or_assign(l.name, l.value);
          }
          rt.ingest(s);
          break;
        }
        case EdgeLabel::Kind::Resample:
          rt.ingest(Snapshot{++t, rt.engine().has_snapshot() ? Valuation{} : first});
          break;
        case EdgeLabel::Kind::Confirm:
          rt.physician(PhysicianEvent{t, l.name, PhysicianEvent::Kind::Confirm, l.state});
          ++physician;
          break;
        case EdgeLabel::Kind::Jump:
          rt.physician(PhysicianEvent{t, l.name, PhysicianEvent::Kind::Jump, l.state});
          ++physician;
          break;
        case EdgeLabel::Kind::Tick:
          t += l.delta;
          rt.advance_to(t);
          ++ticks;
          break;
        case EdgeLabel::Kind::Stutter: break;
      }
      node = e.target;
      ++steps;
      const ComponentNode& n = c.nodes[node];
      CAPTURE(walk);
      CAPTURE(i);
      CAPTURE(l.str());
      CHECK(n.organs[slot] == rt.engine().organ(p));
      CHECK(n.physicians[slot] == rt.engine().physician(p));
      const ProtocolSnapshot want = n.protocols[slot];
      const ProtocolSnapshot got = rt.guidance().process(p).snapshot();
      CHECK(want.phase == got.phase);
      CHECK(want.counter == std::min(got.counter, cap));
      if (want.phase != Phase::Converged) {
        CHECK(want.prev_s == got.prev_s);
        CHECK(want.prev_b == got.prev_b);
      }
      // Each snapshot costs the runtime 1 ms that the graph does not spend.
      if (want.phase == Phase::Diverged1 || want.phase == Phase::Diverged2) {
        CHECK(got.remaining <= want.remaining);
        CHECK(got.remaining > want.remaining - 100);
      }
    }
  }
  CHECK(steps > 1000);
  CHECK(ticks > 0);
  CHECK(physician > 0);
}
