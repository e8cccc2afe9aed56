#include "gsm/engine.hpp"

namespace gsm {

std::string_view to_string(PhysicianEvent::Kind k) {
  switch (k) {
    case PhysicianEvent::Kind::Confirm: return "confirm";
    case PhysicianEvent::Kind::Hold: return "hold";
    case PhysicianEvent::Kind::Jump: return "jump";
  }
  return "?";
}

std::optional<PhysicianEvent::Kind> parse_physician_kind(std::string_view s) {
  if (s == "confirm") return PhysicianEvent::Kind::Confirm;
  if (s == "hold") return PhysicianEvent::Kind::Hold;
  if (s == "jump") return PhysicianEvent::Kind::Jump;
  return std::nullopt;
}

std::string_view to_string(EngineEvent::Kind k) {
  switch (k) {
    case EngineEvent::Kind::OrganStateChanged: return "OrganStateChanged";
    case EngineEvent::Kind::BeliefChanged: return "BeliefChanged";
    case EngineEvent::Kind::Inconsistency: return "Inconsistency";
    case EngineEvent::Kind::Emitted: return "Emitted";
    case EngineEvent::Kind::PhysicianResponse: return "PhysicianResponse";
  }
  return "?";
}

Engine::Engine(std::shared_ptr<const CompiledPack> pack) : pack_(std::move(pack)) {
  for (std::size_t i = 0; i < pack_->size(); ++i) {
    organ_machines_.emplace_back(pack_->organs[i]);
    physician_machines_.emplace_back(pack_->physicians[i]);
    organs_.push_back(organ_machines_.back().initial());
    physicians_.push_back(physician_machines_.back().initial());
  }
}

Value Engine::typed_input(std::string_view name, const Value& v) const {
  const Automaton* owner = pack_->source.input_owner(name);
  if (!owner) throw EngineError(EngineError::Code::UnknownName, "unknown input '" + std::string(name) + "'");
  const TypeSpec& type = owner->find_input(name)->type;
  if (!type.admits(v)) {
    throw EngineError(EngineError::Code::BadValue,
                      "value " + v.str() + " does not fit input '" + std::string(name) + "' of type " +
                          std::string(to_string(type.kind)));
  }
  return type.coerce(v);
}

void Engine::advance_to(Millis t) {
  if (t < now_) {
    throw EngineError(EngineError::Code::StaleTimestamp,
                      "timestamp " + std::to_string(t) + " precedes current time " + std::to_string(now_));
  }
  const Millis delta = t - now_;
  for (std::size_t i = 0; i < organs_.size(); ++i) {
    organ_machines_[i].advance_clocks(organs_[i], delta);
    physician_machines_[i].advance_clocks(physicians_[i], delta);
  }
  now_ = t;
}

std::vector<EngineEvent> Engine::ingest(const Snapshot& snapshot) {
  if (last_snapshot_ && snapshot.t <= *last_snapshot_) {
    throw EngineError(EngineError::Code::StaleTimestamp, "snapshot timestamp " + std::to_string(snapshot.t) +
                                                             " does not exceed previous " +
                                                             std::to_string(*last_snapshot_));
  }
  Valuation merged = inputs_;
  for (const auto& [name, value] : snapshot.values) merged.insert_or_assign(name, typed_input(name, value));
  if (!last_snapshot_) {
    for (const auto& a : pack_->source.automata) {
      for (const auto& in : a.inputs) {
        if (!merged.count(in.name)) {
          throw EngineError(EngineError::Code::IncompleteSnapshot, "first snapshot lacks input '" + in.name + "'");
        }
      }
    }
  }
  advance_to(snapshot.t);
  inputs_ = std::move(merged);
  last_snapshot_ = snapshot.t;

  std::vector<EngineEvent> out;
  for (std::size_t i = 0; i < organs_.size(); ++i) {
    const Machine& m = organ_machines_[i];
    auto fired = m.step(organs_[i], EvalScope{&inputs_, &pack_->params, nullptr, nullptr});
    if (!fired) continue;
    const std::string& name = m.automaton().name;
    if (fired->from != fired->to) {
      EngineEvent e;
      e.kind = EngineEvent::Kind::OrganStateChanged;
      e.t = snapshot.t;
      e.automaton = name;
      e.from = m.state_name(fired->from);
      e.to = m.state_name(fired->to);
      out.push_back(std::move(e));
    }
    for (auto& em : fired->emitted) {
      EngineEvent e;
      e.kind = EngineEvent::Kind::Emitted;
      e.t = snapshot.t;
      e.automaton = name;
      e.event = std::move(em.event);
      e.payload = std::move(em.payload);
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::size_t Engine::require_automaton(std::string_view name) const {
  if (auto i = pack_->organ_index(name)) return *i;
  throw EngineError(EngineError::Code::UnknownName, "unknown automaton '" + std::string(name) + "'");
}

std::vector<EngineEvent> Engine::apply_physician_event(const PhysicianEvent& ev) {
  const std::size_t i = require_automaton(ev.automaton);
  if (!has_snapshot()) {
    throw EngineError(EngineError::Code::NotStarted, "no snapshot ingested yet; physician events need a suggested state");
  }
  const Automaton& organ = pack_->organs[i];
  std::string target;
  if (ev.kind != PhysicianEvent::Kind::Hold) {
    auto idx = organ.resolve_state(ev.state);
    if (!idx) {
      throw EngineError(EngineError::Code::UnknownName,
                        "unknown state '" + ev.state + "' of automaton '" + ev.automaton + "'");
    }
    target = organ.states[*idx].name;
  }
  advance_to(ev.t);

  const Machine& pm = physician_machines_[i];
  const std::string believed = pm.state_name(physicians_[i].location);
  const std::string suggested = organ_machines_[i].state_name(organs_[i].location);
  bool move = false;
  if (ev.kind == PhysicianEvent::Kind::Confirm) move = target == suggested && target != believed;
  else if (ev.kind == PhysicianEvent::Kind::Jump) move = target != believed;

  std::vector<EngineEvent> out;
  EngineEvent resp;
  resp.kind = EngineEvent::Kind::PhysicianResponse;
  resp.t = ev.t;
  resp.automaton = organ.name;
  resp.response = ev.kind;
  resp.state = target;
  resp.applied = move;
  out.push_back(resp);
  if (!move) return out;

  const PhysicianCommand cmd{ev.kind == PhysicianEvent::Kind::Confirm ? PhysicianCommand::Kind::Confirm
                                                                      : PhysicianCommand::Kind::Jump,
                             target};
  auto fired = pm.step(physicians_[i], EvalScope{&inputs_, &pack_->params, nullptr, &cmd});
  if (!fired) return out;
  EngineEvent changed;
  changed.kind = EngineEvent::Kind::BeliefChanged;
  changed.t = ev.t;
  changed.automaton = organ.name;
  changed.from = pm.state_name(fired->from);
  changed.to = pm.state_name(fired->to);
  out.push_back(std::move(changed));
  for (auto& em : fired->emitted) {
    EngineEvent e;
    e.kind = EngineEvent::Kind::Emitted;
    e.t = ev.t;
    e.automaton = pm.automaton().name;
    e.event = std::move(em.event);
    e.payload = std::move(em.payload);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EngineEvent> Engine::detect_inconsistencies(const Snapshot& snapshot) const {
  Valuation merged = inputs_;
  for (const auto& [name, value] : snapshot.values) merged.insert_or_assign(name, typed_input(name, value));
  std::vector<EngineEvent> out;
  for (const auto& rule : pack_->source.rules) {
    bool complete = true;
    for (const auto& n : referenced_names(rule.condition)) {
      if (!merged.count(n) && !pack_->params.count(n)) complete = false;
    }
    if (!complete || !eval_guard(rule.condition, merged, pack_->params)) continue;
    EngineEvent e;
    e.kind = EngineEvent::Kind::Inconsistency;
    e.t = snapshot.t;
    e.rule = rule.id;
    e.message = rule.message;
    out.push_back(std::move(e));
  }
  return out;
}

PatientState Engine::current_state() const {
  PatientState s;
  for (std::size_t i = 0; i < organs_.size(); ++i) s.push_back(organ_machines_[i].state_name(organs_[i].location));
  return s;
}

PhysicianBelief Engine::current_belief() const {
  PhysicianBelief b;
  for (std::size_t i = 0; i < physicians_.size(); ++i) {
    b.push_back(physician_machines_[i].state_name(physicians_[i].location));
  }
  return b;
}

}  // namespace gsm
