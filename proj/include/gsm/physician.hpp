#pragma once

#include "gsm/model.hpp"

namespace gsm {

/// Name of the physician twin of organ automaton `organ`.
std::string physician_name(std::string_view organ);

/// Physician twin of an (unlowered) organ automaton: same states, inputs
/// (readable by actions only), locals, events and entry/exit actions, but
/// no timer actions. Each
/// organ edge src -> tgt (first one per pair kept, self-loops dropped) is
/// guarded by `confirm(tgt) || jump(tgt)`, and the edge set is completed so
/// every state reaches every other state in one step. A hold response
/// matches no guard.
Automaton derive_physician_automaton(const Automaton& organ);

}  // namespace gsm
