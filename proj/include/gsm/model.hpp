#pragma once

// Model language types: packs of organ automata with guards, actions,
// inconsistency rules and the state-indexed guideline table.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gsm/value.hpp"

namespace gsm {

/// Source location. Positions never take part in structural equality, so a
/// pack compares equal to its pretty-printed and reparsed copy.
struct SourcePos {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

/// Guard / value expression tree.
///
/// Guards are boolean trees over comparisons; comparison operands are
/// literals or names (inputs, parameters, locals). `Confirm` and `Jump`
/// atoms only appear in physician automata and test the pending
/// physician response.
struct Expr {
  enum class Kind { Bool, Literal, Ref, Not, And, Or, Compare, Confirm, Jump };

  Kind kind = Kind::Bool;
  bool flag = true;          // Bool
  Value value;               // Literal
  std::string name;          // Ref name, Confirm/Jump target state
  CmpOp op = CmpOp::Eq;      // Compare
  std::vector<Expr> args;    // Not: 1, And/Or/Compare: 2
  SourcePos pos;

  static Expr boolean(bool v);
  static Expr literal(Value v);
  static Expr ref(std::string name);
  static Expr negate(Expr e);
  static Expr conj(Expr a, Expr b);
  static Expr disj(Expr a, Expr b);
  static Expr compare(CmpOp op, Expr a, Expr b);
  static Expr confirm(std::string state);
  static Expr jump(std::string state);

  bool is_true_literal() const { return kind == Kind::Bool && flag; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

/// Names read by an expression (Ref nodes), in first-occurrence order.
std::vector<std::string> referenced_names(const Expr& e);

struct Action {
  enum class Kind { Emit, Set };

  Kind kind = Kind::Emit;
  std::string name;               // event (Emit) or local variable (Set)
  std::optional<Value> payload;   // Emit
  Expr value;                     // Set
  SourcePos pos;

  static Action emit(std::string event, std::optional<Value> payload = std::nullopt);
  static Action set(std::string var, Expr value);

  friend bool operator==(const Action&, const Action&) = default;
};

/// Periodic state action: runs every `duration` ms of dwell time.
struct TimerAction {
  Millis duration = 0;
  std::vector<Action> actions;
  SourcePos pos;
  friend bool operator==(const TimerAction&, const TimerAction&) = default;
};

struct State {
  std::string name;
  std::vector<std::string> aliases;
  std::vector<Action> entry;
  std::vector<Action> exit;
  std::vector<TimerAction> timers;
  SourcePos pos;

  bool has_actions() const { return !entry.empty() || !exit.empty() || !timers.empty(); }
  friend bool operator==(const State&, const State&) = default;
};

struct Transition {
  std::string source;
  std::string target;
  Expr guard = Expr::boolean(true);
  std::vector<Action> actions;
  /// Internal transitions neither exit nor re-enter their source.
  bool internal = false;
  SourcePos pos;
  friend bool operator==(const Transition&, const Transition&) = default;
};

struct InputDecl {
  std::string name;
  TypeSpec type;
  std::string unit;
  SourcePos pos;
  friend bool operator==(const InputDecl&, const InputDecl&) = default;
};

/// Automaton-local variable. Clocks are ints that advance with time.
struct LocalVar {
  std::string name;
  TypeSpec type;
  Value initial;
  bool clock = false;
  SourcePos pos;
  friend bool operator==(const LocalVar&, const LocalVar&) = default;
};

struct Automaton {
  std::string name;
  std::vector<InputDecl> inputs;
  std::vector<LocalVar> locals;
  std::vector<std::string> events;
  std::vector<State> states;
  std::string initial;
  std::vector<Transition> transitions;
  SourcePos pos;

  std::optional<std::size_t> state_index(std::string_view state) const;
  /// Matches a state by name or alias.
  std::optional<std::size_t> resolve_state(std::string_view name_or_alias) const;
  const InputDecl* find_input(std::string_view n) const;
  const LocalVar* find_local(std::string_view n) const;
  bool declares_event(std::string_view e) const;
  std::vector<std::string> state_names() const;

  friend bool operator==(const Automaton&, const Automaton&) = default;
};

struct Param {
  std::string name;
  TypeSpec type;
  Value value;
  SourcePos pos;
  friend bool operator==(const Param&, const Param&) = default;
};

/// Cross-measurement consistency rule; raised when `condition` holds.
struct InconsistencyRule {
  std::string id;
  Expr condition;
  std::string message;
  SourcePos pos;
  friend bool operator==(const InconsistencyRule&, const InconsistencyRule&) = default;
};

/// One row of the guideline table: a pattern over the patient-state tuple
/// (nullopt = wildcard per position) and the guideline texts it selects.
struct GuidelineRule {
  std::vector<std::optional<std::string>> pattern;
  std::vector<std::string> texts;
  SourcePos pos;
  friend bool operator==(const GuidelineRule&, const GuidelineRule&) = default;
};

struct GuidelineTable {
  std::vector<GuidelineRule> rules;
  friend bool operator==(const GuidelineTable&, const GuidelineTable&) = default;
};

struct ProtocolTimers {
  Millis t_short = 30'000;
  Millis t_long = 120'000;
  friend bool operator==(const ProtocolTimers&, const ProtocolTimers&) = default;
};

/// Checker-only coarse domain for one input.
struct DomainOverride {
  std::string input;
  std::vector<Value> values;
  SourcePos pos;
  friend bool operator==(const DomainOverride&, const DomainOverride&) = default;
};

struct ModelPack {
  std::string name;
  std::vector<Param> params;
  std::vector<Automaton> automata;  // order fixes tuple positions
  std::vector<InconsistencyRule> rules;
  GuidelineTable guidelines;
  ProtocolTimers protocol;
  std::vector<DomainOverride> discretization;

  const Automaton* find_automaton(std::string_view n) const;
  std::optional<std::size_t> automaton_index(std::string_view n) const;
  const Param* find_param(std::string_view n) const;
  /// Automaton declaring input `n`, if any.
  const Automaton* input_owner(std::string_view n) const;
  Valuation param_values() const;

  friend bool operator==(const ModelPack&, const ModelPack&) = default;
};

}  // namespace gsm
