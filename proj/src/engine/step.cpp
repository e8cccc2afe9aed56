#include "gsm/step.hpp"

namespace gsm {

Machine::Machine(const Automaton& automaton) : automaton_(&automaton), outgoing_(automaton.states.size()) {
  for (std::size_t i = 0; i < automaton.transitions.size(); ++i) {
    if (auto src = automaton.state_index(automaton.transitions[i].source)) outgoing_[*src].push_back(i);
  }
  for (const auto& l : automaton.locals) {
    if (l.clock) clocks_.push_back(l.name);
  }
}

InstanceState Machine::initial() const {
  InstanceState inst;
  inst.location = automaton_->state_index(automaton_->initial).value_or(0);
  for (const auto& l : automaton_->locals) inst.locals.emplace(l.name, l.initial);
  return inst;
}

void Machine::advance_clocks(InstanceState& inst, Millis delta) const {
  if (delta <= 0) return;
  for (const auto& c : clocks_) {
    auto& v = inst.locals[c];
    v = Value::integer(v.as_int() + delta);
  }
}

std::optional<Machine::Fired> Machine::step(InstanceState& inst, EvalScope scope) const {
  scope.locals = &inst.locals;
  for (std::size_t idx : outgoing_[inst.location]) {
    const Transition& t = automaton_->transitions[idx];
    if (!eval_guard(t.guard, scope)) continue;
    Fired f{idx, inst.location, *automaton_->state_index(t.target), {}};
    run_actions(t.actions, *automaton_, scope, inst.locals, f.emitted);
    inst.location = f.to;
    return f;
  }
  return std::nullopt;
}

bool Machine::enabled(const InstanceState& inst, EvalScope scope) const {
  scope.locals = &inst.locals;
  for (std::size_t idx : outgoing_[inst.location]) {
    if (eval_guard(automaton_->transitions[idx].guard, scope)) return true;
  }
  return false;
}

}  // namespace gsm
