#pragma once

// One patient session without transport: engine + best-practice manager
// driven by timestamped commands, producing the JSON Lines event log.
//
// Log record: {"seq", "t", "kind", ...}. Kinds and their fields:
//   Measurements       values
//   OrganStateChanged  automaton, from, to
//   BeliefChanged      automaton, from, to
//   Inconsistency      rule, message
//   Emitted            automaton, event, payload?
//   PhysicianResponse  automaton, response, state?, applied
//   Alert              automaton, stage, counter
//   Deviation          automaton, organ_state, belief, stage, counter
//   ResetCounter       automaton, counter
//   DisplayGuidelines  state, guidelines

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gsm/engine.hpp"
#include "gsm/guidance.hpp"

namespace gsm::service {

using nlohmann::json;

struct ScenarioError : std::runtime_error {
  ScenarioError(int l, const std::string& msg) : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
  int line;
};

/// One line of a scenario file.
struct Command {
  enum class Kind { Snapshot, Physician, Tick };
  Kind kind = Kind::Tick;
  Snapshot snapshot;        // Snapshot
  PhysicianEvent physician; // Physician
  Millis t = 0;
  int line = 0;
};

/// `{"t": ms, "kind": "snapshot", "values": {...}}`,
/// `{"t": ms, "kind": "physician", "automaton": A, "response": "confirm"|"hold"|"jump", "state": S}`,
/// `{"t": ms, "kind": "tick"}`. Throws std::invalid_argument on a bad shape.
Command parse_command(const json& j);

/// JSON Lines; blank lines skipped. Timestamps must not decrease.
std::vector<Command> parse_scenario(std::string_view text);

/// JSON number or string to a Value; strings that read as numbers become decimals.
Value value_from_json(const json& j);
json value_to_json(const Value& v);

class Runtime {
 public:
  explicit Runtime(std::shared_ptr<const CompiledPack> pack);

  /// Each call returns the records it appended to the log. Engine errors
  /// propagate and leave the session unchanged.
  std::vector<json> ingest(const Snapshot& snapshot);
  std::vector<json> physician(const PhysicianEvent& event);
  /// Lets protocol timers and clocks run up to `t`.
  std::vector<json> advance_to(Millis t);
  std::vector<json> apply(const Command& command);

  const std::vector<json>& log() const { return log_; }
  /// The log as JSON Lines text.
  std::string log_text() const;

  /// {t, started, S, B, processes: [{automaton, organ, belief, phase, counter, remaining}], guidelines}
  json state() const;
  /// {state, guidelines, displayed}
  json guidelines() const;
  json deviation_log() const;

  Millis now() const { return now_; }
  const Engine& engine() const { return engine_; }
  const BestPracticeManager& guidance() const { return guidance_; }
  const CompiledPack& pack() const { return *pack_; }

 private:
  json& append(Millis t, std::string_view kind);
  void record(const std::vector<EngineEvent>& events);
  void record(const std::vector<ProtocolAction>& actions);
  void evaluate(Millis t);
  void require_not_before(Millis t) const;

  std::shared_ptr<const CompiledPack> pack_;
  Engine engine_;
  BestPracticeManager guidance_;
  std::vector<json> log_;
  Millis now_ = 0;
};

}  // namespace gsm::service
