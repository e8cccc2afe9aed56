#include <doctest.h>

#include <random>

#include "gsm/cardiac.hpp"
#include "gsm/compile.hpp"
#include "gsm/eval.hpp"
#include "gsm/lower.hpp"
#include "gsm/parser.hpp"
#include "gsm/physician.hpp"
#include "gsm/step.hpp"
#include "gsm/validate.hpp"
#include "experiments.hpp"
#include "random_pack.hpp"
#include "statechart_reference.hpp"

using namespace gsm;
using gsm::testing::read_text;

namespace {

ModelPack parse_ok(std::string_view text) {
  ParseResult r = parse_model(text);
  for (const auto& d : r.diagnostics) INFO(d.format("<test>"));
  REQUIRE(r.ok());
  return *r.pack;
}

bool has_message(const Diagnostics& diags, Severity s, std::string_view part) {
  for (const auto& d : diags) {
    if (d.severity == s && d.message.find(part) != std::string::npos) return true;
  }
  return false;
}

const char* kOverlap = R"(pack T
automaton A {
  input sbp: int range 0..300 step 5
  initial S0
  state S0
  state S1
  state S2
  trans S0 -> S1 when sbp <= 20
  trans S0 -> S2 when sbp <= 30
  trans S1 -> S0 when sbp > 30
  trans S2 -> S0 when sbp > 30
}
guidelines {
  (A=S1) -> "one"
}
)";

}  // namespace

TEST_CASE("shipped pack parses, validates and compiles") {
  const ModelPack pack = parse_ok(read_text(testing::source_dir() / "models" / "cardiac_arrest.gsm"));
  CHECK(pack.name == "CardiacArrest");
  REQUIRE(pack.automata.size() == 3);
  CHECK(pack.automata[0].name == "Arrhythmia");
  CHECK(pack.automata[0].resolve_state("VentricularFibrillation") == pack.automata[0].state_index("VFib"));
  CHECK(pack.rules.size() == 3);
  CHECK(pack.protocol.t_short == 30000);
  CHECK(pack.protocol.t_long == 120000);
  CHECK(pack.find_param("PH_LOW_THRESHOLD")->value == Value::decimal(*Decimal::parse("7.35")));

  // Wildcard sources expand to one transition per state other than the target.
  CHECK(pack.automata[1].transitions.size() == 3 * (pack.automata[1].states.size() - 1));
  CHECK(pack.automata[1].transitions[0].source == "Init");
  CHECK(pack.automata[1].transitions[1].source == "MetabolicAcidosis");

  CHECK_FALSE(has_errors(validate(pack)));
  const CompiledPack compiled = compile(pack);
  CHECK(compiled.size() == 3);
  CHECK(compiled.physicians[1].name == physician_name("BGI"));

  // The built-in copy is the file on disk.
  CHECK(std::string(cardiac_pack_source()) == read_text(testing::source_dir() / "models" / "cardiac_arrest.gsm"));
  CHECK(std::string(cardiac_properties()) == read_text(testing::source_dir() / "models" / "cardiac.ctl"));
}

TEST_CASE("print and reparse reproduce the pack") {
  const ModelPack cardiac = parse_ok(cardiac_pack_source());
  CHECK(parse_ok(print_model(cardiac)) == cardiac);

  std::mt19937 rng(3);
  testing::RandomPackOptions o;
  o.state_actions = true;
  o.locals = true;
  o.discretize = true;
  for (int i = 0; i < 200; ++i) {
    const std::string text = testing::random_pack_text(rng, o);
    CAPTURE(text);
    const ModelPack p = parse_ok(text);
    const std::string printed = print_model(p);
    CAPTURE(printed);
    const ModelPack again = parse_ok(printed);
    CHECK(again == p);
    CHECK(print_model(again) == printed);
  }
}

TEST_CASE("parse errors carry positions") {
  SUBCASE("unknown identifier") {
    const ParseResult r = parse_model("pack T\nautomaton A {\n  input x: int range 0..3 step 1\n  initial S\n  state S\n"
                                      "  trans S -> S when y > 1\n}\nguidelines {\n  (*) -> \"g\"\n}\n");
    CHECK_FALSE(r.ok());
    REQUIRE(has_errors(r.diagnostics));
    const Diagnostic& d = r.diagnostics.front();
    CHECK(d.pos.line == 6);
    CHECK(d.message.find("unknown identifier 'y'") != std::string::npos);
    CHECK(d.format("m.gsm").rfind("m.gsm:6:", 0) == 0);
    CHECK(d.format("m.gsm").find(": error: ") != std::string::npos);
  }
  SUBCASE("syntax") {
    const ParseResult r = parse_model("pack T\nautomaton A {\n  initial S\n  state S\n  trans S -> \n}\n");
    CHECK_FALSE(r.ok());
    CHECK(has_errors(r.diagnostics));
  }
  SUBCASE("guard of the wrong type") {
    const ParseResult r = parse_model("pack T\nautomaton A {\n  input r: enum { X, Y }\n  initial S\n  state S\n"
                                      "  trans S -> S when r > 3\n}\nguidelines {\n  (*) -> \"g\"\n}\n");
    CHECK_FALSE(r.ok());
  }
  SUBCASE("inconsistency rules do not see locals") {
    const ParseResult r = parse_model("pack T\nautomaton A {\n  input x: int range 0..3 step 1\n"
                                      "  var v: int range 0..3 step 1 = 0\n  initial S\n  state S\n"
                                      "  trans S -> S when x > v\n}\ninconsistency \"r\" when v > 1 message \"m\"\n"
                                      "guidelines {\n  (*) -> \"g\"\n}\n");
    CHECK_FALSE(r.ok());
    CHECK(has_message(r.diagnostics, Severity::Error, "unknown identifier 'v'"));
  }
}

TEST_CASE("validation warnings") {
  const ModelPack pack = parse_ok(kOverlap);
  const Diagnostics d = validate(pack);
  CHECK_FALSE(has_errors(d));
  CHECK(has_message(d, Severity::Warning, "guards of 'S0 -> S1' and 'S0 -> S2' in 'A' overlap (witness: sbp=20)"));
  CHECK(has_message(d, Severity::Warning, "guideline table has no row for 2 of 3 state tuples, e.g. (S0)"));

  const auto w = overlap_witness(pack, pack.automata[0], pack.automata[0].transitions[0].guard,
                                 pack.automata[0].transitions[1].guard);
  REQUIRE(w);
  CHECK(w->at("sbp") == Value::integer(20));
  CHECK_FALSE(overlap_witness(pack, pack.automata[0], pack.automata[0].transitions[0].guard,
                              pack.automata[0].transitions[2].guard));

  const ModelPack unreachable = parse_ok(
      "pack T\nautomaton A {\n  input x: int range 0..3 step 1\n  initial S\n  state S { entry { set v = 1 } }\n"
      "  state U\n  var v: int range 0..3 step 1 = 0\n  trans S -> S when x > 1\n}\nguidelines {\n  (*) -> \"g\"\n}\n");
  const Diagnostics d2 = validate(unreachable);
  CHECK(has_message(d2, Severity::Warning, "state 'U' of 'A' is unreachable"));
  CHECK(has_message(d2, Severity::Warning, "entry actions of initial state 'S'"));
  CHECK(has_message(d2, Severity::Warning, "has no transition to 'U'"));

  // Diagnostics come out sorted and identical on every run.
  CHECK(validate(pack).size() == d.size());
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i - 1].pos.line <= d[i].pos.line);
}

TEST_CASE("validation errors block compilation") {
  ModelPack pack = parse_ok(kOverlap);
  pack.automata[0].transitions[0].target = "Nowhere";
  CHECK(has_message(validate(pack), Severity::Error, "unknown target state 'Nowhere'"));
  CHECK_THROWS_AS(compile(pack), CompileError);

  ModelPack twice = parse_ok(kOverlap);
  twice.automata.push_back(twice.automata[0]);
  CHECK(has_message(validate(twice), Severity::Error, "duplicate automaton 'A'"));
}

TEST_CASE("parameter overrides") {
  const ModelPack pack = parse_ok(cardiac_pack_source());
  const ModelPack changed = with_params(pack, {{"SBP_PULSE_MIN", Value::integer(25)}});
  CHECK(changed.find_param("SBP_PULSE_MIN")->value == Value::integer(25));
  // Ints widen to a decimal parameter.
  CHECK(with_params(pack, {{"PH_LOW_THRESHOLD", Value::integer(7)}}).find_param("PH_LOW_THRESHOLD")->value ==
        Value::decimal(Decimal::from_int(7)));
  CHECK_THROWS_AS(with_params(pack, {{"NOPE", Value::integer(1)}}), std::invalid_argument);
  CHECK_THROWS_AS(with_params(pack, {{"HR_MIN", Value::enumerator("X")}}), std::invalid_argument);
}

TEST_CASE("decimals are exact") {
  CHECK(Decimal::parse("7.35")->micros() == 7'350'000);
  CHECK(Decimal::parse("-0.5")->micros() == -500'000);
  CHECK_FALSE(Decimal::parse("7.1234567"));
  CHECK_FALSE(Decimal::parse("abc"));
  CHECK(Decimal::parse("7.35")->str() == "7.35");
  CHECK(Decimal::from_int(7).str() == "7.0");
  CHECK(compare_values(Value::integer(7), Value::decimal(*Decimal::parse("7.0"))) == std::partial_ordering::equivalent);
  CHECK(compare_values(Value::decimal(*Decimal::parse("7.34")), Value::decimal(*Decimal::parse("7.35"))) ==
        std::partial_ordering::less);
  CHECK(compare_values(Value::enumerator("A"), Value::integer(1)) == std::partial_ordering::unordered);

  TypeSpec t = TypeSpec::decimal();
  t.range = NumericRange{Value::decimal(*Decimal::parse("6.8")), Value::decimal(*Decimal::parse("7.0")),
                         Value::decimal(*Decimal::parse("0.1"))};
  CHECK(t.domain().size() == 3);
}

TEST_CASE("guard evaluation") {
  const ModelPack pack = parse_ok(cardiac_pack_source());
  const Automaton& arr = pack.automata[0];
  const Transition* to_vfib = nullptr;
  for (const auto& t : arr.transitions) {
    if (t.source == "Init" && t.target == "VFib") to_vfib = &t;
  }
  REQUIRE(to_vfib);
  const Expr& vfib = to_vfib->guard;
  const Valuation params = pack.param_values();
  CHECK(eval_guard(vfib, {{"rhythm", Value::enumerator("VFIB")}, {"sbp", Value::integer(20)}}, params));
  CHECK_FALSE(eval_guard(vfib, {{"rhythm", Value::enumerator("VFIB")}, {"sbp", Value::integer(25)}}, params));
  CHECK_FALSE(eval_guard(vfib, {{"rhythm", Value::enumerator("SINUS")}, {"sbp", Value::integer(0)}}, params));
  CHECK_THROWS_AS(eval_guard(vfib, Valuation{}, params), EvalError);

  // Locals shadow inputs, which shadow params.
  const Valuation in{{"k", Value::integer(1)}};
  const Valuation pa{{"k", Value::integer(2)}};
  const Valuation lo{{"k", Value::integer(3)}};
  CHECK(EvalScope{&in, &pa, &lo, nullptr}.find("k")->as_int() == 3);
  CHECK(EvalScope{&in, &pa, nullptr, nullptr}.find("k")->as_int() == 1);
  CHECK(EvalScope{nullptr, &pa, nullptr, nullptr}.find("k")->as_int() == 2);
}

TEST_CASE("physician twin") {
  const ModelPack pack = parse_ok(cardiac_pack_source());
  const Automaton twin = derive_physician_automaton(pack.automata[1]);
  CHECK(twin.name == "BGI_Physician");
  CHECK(twin.states.size() == pack.automata[1].states.size());
  CHECK(twin.locals == pack.automata[1].locals);
  const std::size_t n = twin.states.size();
  // Every state reaches every other in one step, and there are no self-loops.
  CHECK(twin.transitions.size() == n * (n - 1));
  for (const auto& t : twin.transitions) {
    CHECK(t.source != t.target);
    const PhysicianCommand confirm{PhysicianCommand::Kind::Confirm, t.target};
    const PhysicianCommand jump{PhysicianCommand::Kind::Jump, t.target};
    const PhysicianCommand other{PhysicianCommand::Kind::Jump, t.source};
    CHECK(eval_guard(t.guard, EvalScope{nullptr, nullptr, nullptr, &confirm}));
    CHECK(eval_guard(t.guard, EvalScope{nullptr, nullptr, nullptr, &jump}));
    CHECK_FALSE(eval_guard(t.guard, EvalScope{nullptr, nullptr, nullptr, &other}));
    CHECK_FALSE(eval_guard(t.guard, EvalScope{}));
  }
  // Entry actions survive so the physician's State variable follows the belief.
  const auto k = twin.state_index("MetabolicAcidosis");
  REQUIRE(k);
  CHECK_FALSE(twin.states[*k].entry.empty());
}

TEST_CASE("lowering moves state actions onto transitions") {
  const ModelPack pack = parse_ok(R"(pack T
automaton A {
  input x: int range 0..1 step 1
  event e_in, e_out, e_tick, e_go
  initial S
  state S { exit { emit e_out } }
  state W { entry { emit e_in }
    every 1000 { emit e_tick } }
  trans S -> W when x == 1 { emit e_go }
  trans W -> S when x == 0
}
guidelines {
  (*) -> "g"
}
)");
  const Automaton low = lower_automaton(pack.automata[0], pack);
  for (const auto& s : low.states) CHECK_FALSE(s.has_actions());
  REQUIRE(low.transitions.size() == 3);
  const Transition& go = low.transitions[0];
  REQUIRE(go.actions.size() == 4);
  CHECK(go.actions[0].name == "e_out");
  CHECK(go.actions[1].name == "e_go");
  CHECK(go.actions[2].name == "e_in");
  CHECK(go.actions[3].kind == Action::Kind::Set);
  CHECK(go.actions[3].name == "timer_W");
  const Transition& timer = low.transitions[2];
  CHECK(timer.internal);
  CHECK(timer.source == "W");
  CHECK(timer.target == "W");
  REQUIRE(low.find_local("timer_W"));
  CHECK(low.find_local("timer_W")->clock);

  // A pack without state actions is left alone.
  const ModelPack plain = parse_ok(kOverlap);
  CHECK(lower_actions(plain) == plain);

  // Step semantics: dwell time fires the periodic action, exactly once per period.
  const Machine m(low);
  InstanceState inst = m.initial();
  const Valuation one{{"x", Value::integer(1)}};
  const Valuation params;
  auto fired = m.step(inst, EvalScope{&one, &params, nullptr, nullptr});
  REQUIRE(fired);
  CHECK(m.state_name(inst.location) == "W");
  CHECK(fired->emitted.size() == 3);
  m.advance_clocks(inst, 999);
  CHECK_FALSE(m.step(inst, EvalScope{&one, &params, nullptr, nullptr}));
  m.advance_clocks(inst, 1);
  fired = m.step(inst, EvalScope{&one, &params, nullptr, nullptr});
  REQUIRE(fired);
  REQUIRE(fired->emitted.size() == 1);
  CHECK(fired->emitted[0].event == "e_tick");
  CHECK_FALSE(m.step(inst, EvalScope{&one, &params, nullptr, nullptr}));
}

TEST_CASE("lowered machine matches the statechart interpreter") {
  const testing::LoweringReport r = testing::co_simulate_lowering(40, 50, 5);
  CHECK(r.charts == 40);
  CHECK(r.mismatches == 0);
  CHECK(r.events > 0);
  CHECK(r.timer_events > 0);
  if (r.mismatches) MESSAGE(r.first_problem);
}
