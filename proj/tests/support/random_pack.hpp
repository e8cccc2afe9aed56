#pragma once

// Random small packs in `.gsm` source form, for property tests.

#include <random>
#include <string>

namespace gsm::testing {

struct RandomPackOptions {
  int min_automata = 1;
  int max_automata = 2;
  int min_states = 2;
  int max_states = 4;
  int max_inputs = 2;        // per automaton, at least one
  int max_domain = 3;        // values per input
  int max_transitions = 6;   // per automaton, besides wildcards
  double wildcard_rate = 0.2;
  /// Entry/exit/timer actions, locals and events.
  bool state_actions = false;
  int max_timer_ms = 3000;
  bool locals = false;
  bool discretize = false;   // emit a discretization block for ranged ints
};

/// Always parses and validates without errors.
std::string random_pack_text(std::mt19937& rng, const RandomPackOptions& options);

}  // namespace gsm::testing
