#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsm/checker/property.hpp"
#include "gsm/checker/state_space.hpp"

namespace gsm::checker {

/// Implicit stutter adds a self-loop to every node. Auto: off for A[]/E<>
/// (so `deadlock` means "no move at all"), on for A<>/E[].
enum class StutterMode { Auto, On, Off };

struct CheckOptions {
  StutterMode stutter = StutterMode::Auto;
  /// Largest explicit product built when a property spans several
  /// components and cannot be split.
  std::size_t product_cap = 5'000'000;
};

struct Trace {
  std::vector<EdgeLabel> steps;
  /// For lasso traces: index in `steps` where the repeated cycle begins.
  std::optional<std::size_t> loop_start;

  std::vector<std::string> labels() const;
};

struct Verdict {
  std::string id;
  std::string formula;
  Quantifier quantifier = Quantifier::AG;
  bool satisfied = false;
  /// Counterexample (A[] violated, A<> violated) or witness (E<> / E[] satisfied).
  Trace trace;
  std::size_t nodes_visited = 0;
  double time_ms = 0;
  /// How the verdict was computed: "component", "decomposed" or "product".
  std::string method;

  /// A<> formulas whose body is an implication are also checked as A[].
  struct Reading {
    bool satisfied = false;
    Trace trace;
    std::size_t nodes_visited = 0;
    std::string method;
  };
  std::optional<Reading> invariant_reading;

  /// The A[] reading when present, else the verdict itself.
  bool effective() const { return invariant_reading ? invariant_reading->satisfied : satisfied; }
};

/// Throws ResourceError when an explicit product exceeds the cap and
/// PreconditionError when a counter constant is not below the space's
/// counter cap.
Verdict check(const StateSpace& space, const PropertyAst& property, const CheckOptions& options = {});

}  // namespace gsm::checker
