#pragma once

#include "gsm/diagnostics.hpp"
#include "gsm/model.hpp"

namespace gsm {

/// Structural lint of a parsed pack. Errors block compilation; warnings
/// and infos do not. Output is deterministic for a given pack.
///
/// Checks: endpoint/initial/name consistency (errors), initial-state
/// fan-out, structurally unreachable states, overlapping guards out of one
/// state (with a witness valuation), entry actions on the initial state,
/// guideline rows missing for some state tuple (warnings) and inputs that
/// nothing reads (info).
Diagnostics validate(const ModelPack& pack);

/// Overlap witness search, exposed for tests. Returns the first valuation
/// (variables in first-read order, each domain scanned from its largest
/// value down) satisfying both guards, or nullopt.
std::optional<Valuation> overlap_witness(const ModelPack& pack, const Automaton& automaton, const Expr& a,
                                         const Expr& b);

}  // namespace gsm
