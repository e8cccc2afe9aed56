#pragma once

// Best-practice manager: guideline lookup by patient state and the
// convergence-divergence alert protocol, run once per process.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsm/model.hpp"

namespace gsm {

using StateTuple = std::vector<std::string>;

enum class Phase { Converged, Diverged1, Diverged2, DivergedFinal };
enum class AlertStage { First, Second, Final };

std::string_view to_string(Phase p);
std::string_view to_string(AlertStage s);

struct DeviationRecord {
  Millis t = 0;
  std::string automaton;
  std::string organ_state;  // S_i
  std::string belief;       // B_i
  AlertStage stage = AlertStage::First;
  int counter = 0;
  friend bool operator==(const DeviationRecord&, const DeviationRecord&) = default;
};

/// Protocol output. `automaton` is empty for DisplayGuidelines, which
/// concerns the whole tuple.
struct ProtocolAction {
  enum class Kind { Alert, DisplayGuidelines, ResetCounter, LogDeviation };

  Kind kind = Kind::Alert;
  Millis t = 0;
  std::string automaton;
  AlertStage stage = AlertStage::First;   // Alert
  int counter = 0;                        // Alert, ResetCounter (value after the action)
  StateTuple state;                       // DisplayGuidelines
  std::vector<std::string> guidelines;    // DisplayGuidelines
  DeviationRecord record;                 // LogDeviation

  friend bool operator==(const ProtocolAction&, const ProtocolAction&) = default;
};

std::string_view to_string(ProtocolAction::Kind k);

/// Snapshot of one protocol instance; enough to resume it elsewhere.
struct ProtocolSnapshot {
  Phase phase = Phase::Converged;
  int counter = 0;
  Millis remaining = 0;  // time left on the armed timer (Diverged1/Diverged2)
  std::string prev_s;
  std::string prev_b;
  bool announced = false;  // ResetCounter already sent for the current convergence
  friend bool operator==(const ProtocolSnapshot&, const ProtocolSnapshot&) = default;
};

/// Convergence-divergence protocol for one process (organ state S_i versus
/// physician belief B_i).
///
///   Converged, S_i != B_i   -> First alert, counter++, arm t_short
///   t_short expires, same   -> Second alert, counter++, arm t_long
///   t_long expires, same    -> Final alert, counter++, wait
///   (S_i, B_i) changes      -> restart: First alert again, or converge
///   S_i == B_i              -> counter := 0 (ResetCounter once per convergence)
///
/// Expiry is inclusive: a timer armed for T ms fires once T ms have elapsed.
class DivergenceProtocol {
 public:
  DivergenceProtocol(std::string automaton, ProtocolTimers timers);

  std::vector<ProtocolAction> evaluate(const std::string& s, const std::string& b, Millis now);

  /// Advances the armed timer by `delta`; actions are stamped at their exact
  /// expiry instants, taking `start` as the beginning of the interval.
  std::vector<ProtocolAction> tick(Millis delta, Millis start = 0);

  Phase phase() const { return st_.phase; }
  int counter() const { return st_.counter; }
  Millis remaining() const { return st_.remaining; }
  bool armed() const { return st_.phase == Phase::Diverged1 || st_.phase == Phase::Diverged2; }
  const std::string& automaton() const { return automaton_; }
  const ProtocolTimers& timers() const { return timers_; }

  ProtocolSnapshot snapshot() const { return st_; }
  void restore(const ProtocolSnapshot& s) { st_ = s; }

 private:
  void alert(AlertStage stage, Millis t, std::vector<ProtocolAction>& out);
  void converge(Millis t, std::vector<ProtocolAction>& out);

  std::string automaton_;
  ProtocolTimers timers_;
  ProtocolSnapshot st_;
};

struct NoGuidelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First matching row's texts. Throws NoGuidelineError when nothing matches.
std::vector<std::string> lookup_guidelines(const GuidelineTable& table, const StateTuple& s);

/// One protocol per process plus tuple-level guideline display. The
/// guideline set is shown when every process has converged and S differs
/// from the last tuple shown; any divergence clears the last-shown tuple.
class BestPracticeManager {
 public:
  explicit BestPracticeManager(const ModelPack& pack);

  std::vector<ProtocolAction> evaluate(const StateTuple& s, const StateTuple& b, Millis now);

  /// Advances every protocol to `now`; actions ordered by time, then process.
  std::vector<ProtocolAction> advance_to(Millis now);

  std::vector<std::string> lookup_guidelines(const StateTuple& s) const;
  const std::vector<DeviationRecord>& deviation_log() const { return log_; }

  const DivergenceProtocol& process(std::size_t i) const { return protocols_[i]; }
  std::size_t size() const { return protocols_.size(); }
  Millis now() const { return now_; }
  const std::optional<StateTuple>& displayed() const { return displayed_; }
  const std::vector<std::string>& current_guidelines() const { return current_guidelines_; }

  /// Earliest pending timer expiry, if any protocol is armed.
  std::optional<Millis> next_deadline() const;

 private:
  void record(const std::vector<ProtocolAction>& actions);

  GuidelineTable table_;
  std::vector<DivergenceProtocol> protocols_;
  std::vector<DeviationRecord> log_;
  std::optional<StateTuple> displayed_;
  std::vector<std::string> current_guidelines_;
  Millis now_ = 0;
};

}  // namespace gsm
