#pragma once

// Runtime network of lowered organ automata and their physician twins.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsm/compile.hpp"
#include "gsm/step.hpp"

namespace gsm {

/// Current location name per process, in pack order.
using StateTuple = std::vector<std::string>;
using PatientState = StateTuple;
using PhysicianBelief = StateTuple;

/// Measurements at one instant. Absent variables keep their previous value.
struct Snapshot {
  Millis t = 0;
  Valuation values;
};

struct PhysicianEvent {
  enum class Kind { Confirm, Hold, Jump };
  Millis t = 0;
  std::string automaton;  // organ automaton name
  Kind kind = Kind::Hold;
  std::string state;      // Confirm / Jump only; name or alias
};

std::string_view to_string(PhysicianEvent::Kind k);
std::optional<PhysicianEvent::Kind> parse_physician_kind(std::string_view s);

/// Engine output. Which fields are meaningful depends on `kind`:
///   OrganStateChanged, BeliefChanged: automaton, from, to
///   Inconsistency: rule, message
///   Emitted: automaton (organ or physician twin), event, payload
///   PhysicianResponse: automaton, response, state, applied
struct EngineEvent {
  enum class Kind { OrganStateChanged, BeliefChanged, Inconsistency, Emitted, PhysicianResponse };

  Kind kind = Kind::OrganStateChanged;
  Millis t = 0;
  std::string automaton;
  std::string from;
  std::string to;
  std::string rule;
  std::string message;
  std::string event;
  std::optional<Value> payload;
  PhysicianEvent::Kind response = PhysicianEvent::Kind::Hold;
  std::string state;
  bool applied = false;

  friend bool operator==(const EngineEvent&, const EngineEvent&) = default;
};

std::string_view to_string(EngineEvent::Kind k);

struct EngineError : std::runtime_error {
  enum class Code { StaleTimestamp, IncompleteSnapshot, UnknownName, BadValue, NotStarted };
  EngineError(Code c, const std::string& what) : std::runtime_error(what), code(c) {}
  Code code;
};

/// Single-writer engine. Organ automata move only on snapshots (at most
/// one transition each per snapshot); physician twins move only on
/// physician events.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const CompiledPack> pack);

  const CompiledPack& pack() const { return *pack_; }

  /// Throws EngineError on a stale timestamp, an incomplete first snapshot,
  /// an unknown variable or an ill-typed value. An empty `values` map
  /// re-evaluates guards against the held values.
  std::vector<EngineEvent> ingest(const Snapshot& snapshot);

  /// Throws EngineError on unknown automaton/state, a stale timestamp or
  /// when no snapshot has been ingested yet.
  std::vector<EngineEvent> apply_physician_event(const PhysicianEvent& event);

  /// Pack inconsistency rules evaluated over the held values overlaid with
  /// `snapshot`. Rules reading a variable with no value yet are skipped.
  std::vector<EngineEvent> detect_inconsistencies(const Snapshot& snapshot) const;

  /// Lets time pass without input (clocks advance). `t` must not precede now().
  void advance_to(Millis t);

  PatientState current_state() const;
  PhysicianBelief current_belief() const;

  const Valuation& inputs() const { return inputs_; }
  Millis now() const { return now_; }
  bool has_snapshot() const { return last_snapshot_.has_value(); }

  const InstanceState& organ(std::size_t i) const { return organs_[i]; }
  const InstanceState& physician(std::size_t i) const { return physicians_[i]; }
  const Machine& organ_machine(std::size_t i) const { return organ_machines_[i]; }
  const Machine& physician_machine(std::size_t i) const { return physician_machines_[i]; }

  /// Checks and coerces one measurement against its declared type.
  Value typed_input(std::string_view name, const Value& v) const;

 private:
  std::size_t require_automaton(std::string_view name) const;

  std::shared_ptr<const CompiledPack> pack_;
  std::vector<Machine> organ_machines_;
  std::vector<Machine> physician_machines_;
  std::vector<InstanceState> organs_;
  std::vector<InstanceState> physicians_;
  Valuation inputs_;
  Millis now_ = 0;
  std::optional<Millis> last_snapshot_;
};

}  // namespace gsm
