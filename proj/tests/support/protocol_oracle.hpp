#pragma once

// Straight-line rendering of the convergence-divergence protocol as a
// program-counter machine, and an exhaustive comparison against the
// engine + best-practice manager on a two-state process.

#include <string>
#include <vector>

#include "gsm/guidance.hpp"

namespace gsm::testing {

struct OracleAlert {
  Millis t = 0;
  AlertStage stage = AlertStage::First;
  int counter = 0;
  std::string s;
  std::string b;
  friend bool operator==(const OracleAlert&, const OracleAlert&) = default;
};

/// One process. A change of (S, B) while waiting jumps straight back to the
/// `if S != B` line; timer expiry is inclusive.
class ReferenceProtocol {
 public:
  ReferenceProtocol(Millis t_short, Millis t_long, std::string s, std::string b);

  /// Runs expired waits up to `now`.
  void advance(Millis now);
  /// New (S, B) observed at `now`; call advance(now) first.
  void update(const std::string& s, const std::string& b, Millis now);

  int counter() const { return counter_; }
  /// True while the last pass took the `else` branch (S == B).
  bool displaying() const { return pc_ == Pc::Converged; }
  const std::vector<OracleAlert>& alerts() const { return alerts_; }

 private:
  enum class Pc { Converged, WaitShort, WaitLong, Held };
  void restart(Millis now);

  Millis t_short_;
  Millis t_long_;
  Pc pc_ = Pc::Converged;
  Millis deadline_ = 0;
  int counter_ = 0;
  std::string s_, b_, prev_s_, prev_b_;
  std::vector<OracleAlert> alerts_;
};

struct ProtocolOracleReport {
  std::size_t sequences = 0;  // event sequences compared (every prefix counts)
  std::size_t converged_steps = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
  /// Divergence then only ticks: exactly First, Second, Final and counter 3.
  bool held_cascade = false;
  /// Random full-length sequences also replayed through the session runtime log.
  std::size_t runtime_samples = 0;
};

/// Alphabet: organ toggle, belief toggle (physician jump), tick of `tick_ms`.
ProtocolOracleReport run_protocol_oracle(int max_length, std::size_t runtime_samples = 0, Millis t_short = 20000,
                                         Millis t_long = 30000, Millis tick_ms = 10000);

}  // namespace gsm::testing
