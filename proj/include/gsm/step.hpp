#pragma once

// One-step execution of a flat (lowered) automaton. Shared by the runtime
// engine and the model checker so both see identical semantics.

#include <optional>
#include <vector>

#include "gsm/eval.hpp"
#include "gsm/model.hpp"

namespace gsm {

/// Run-time configuration of one automaton instance.
struct InstanceState {
  std::size_t location = 0;
  Valuation locals;
  friend bool operator==(const InstanceState&, const InstanceState&) = default;
};

/// Lowered automaton plus per-state outgoing transition lists.
class Machine {
 public:
  explicit Machine(const Automaton& automaton);

  const Automaton& automaton() const { return *automaton_; }
  const std::vector<std::size_t>& outgoing(std::size_t state) const { return outgoing_[state]; }
  const std::vector<std::string>& clocks() const { return clocks_; }
  const std::string& state_name(std::size_t i) const { return automaton_->states[i].name; }

  InstanceState initial() const;

  /// Adds `delta` ms to every clock.
  void advance_clocks(InstanceState& inst, Millis delta) const;

  struct Fired {
    std::size_t transition;
    std::size_t from;
    std::size_t to;
    std::vector<EmittedEvent> emitted;
  };

  /// Fires the first enabled transition out of the current location, in
  /// declaration order. `scope.locals` is replaced by the instance's locals.
  std::optional<Fired> step(InstanceState& inst, EvalScope scope) const;

  /// True when some transition out of the current location is enabled.
  bool enabled(const InstanceState& inst, EvalScope scope) const;

 private:
  const Automaton* automaton_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::string> clocks_;
};

}  // namespace gsm
