#pragma once

// Guard and action evaluation over inputs, parameters and automaton locals.

#include <stdexcept>
#include <string>
#include <vector>

#include "gsm/model.hpp"

namespace gsm {

/// Pending physician response tested by `confirm(S)` / `jump(S)` atoms.
struct PhysicianCommand {
  enum class Kind { Confirm, Jump };
  Kind kind = Kind::Confirm;
  std::string state;
  friend bool operator==(const PhysicianCommand&, const PhysicianCommand&) = default;
};

/// Raised when a guard reads a name that no scope binds. Signals a wiring
/// bug in the caller, never bad input data.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Name resolution order: locals, inputs, params. Null scopes are empty.
struct EvalScope {
  const Valuation* inputs = nullptr;
  const Valuation* params = nullptr;
  const Valuation* locals = nullptr;
  const PhysicianCommand* command = nullptr;

  const Value* find(std::string_view name) const;
};

bool eval_guard(const Expr& guard, const EvalScope& scope);
bool eval_guard(const Expr& guard, const Valuation& snapshot, const Valuation& params);
Value eval_value(const Expr& e, const EvalScope& scope);

/// An emitted event with its optional payload.
struct EmittedEvent {
  std::string event;
  std::optional<Value> payload;
  friend bool operator==(const EmittedEvent&, const EmittedEvent&) = default;
};

/// Runs actions in order against `locals` (which `scope.locals` should
/// alias); emitted events are appended to `out`.
void run_actions(const std::vector<Action>& actions, const Automaton& automaton, const EvalScope& scope,
                 Valuation& locals, std::vector<EmittedEvent>& out);

}  // namespace gsm
