#pragma once

#include "gsm/model.hpp"

namespace gsm {

/// Moves state actions onto transitions so that no state carries actions:
///
///   - every non-internal transition runs exit(source), its own actions,
///     then entry(target), and restarts the target's timer clocks;
///   - each periodic timer action of state X becomes a clock `timer_X` and
///     an internal self-transition `X -> X when timer_X >= D` that runs
///     the actions and restarts the clock. These are appended after the
///     original transitions, which therefore keep priority.
///
/// Packs without state actions are returned unchanged.
ModelPack lower_actions(const ModelPack& pack);
Automaton lower_automaton(const Automaton& automaton, const ModelPack& pack);

}  // namespace gsm
