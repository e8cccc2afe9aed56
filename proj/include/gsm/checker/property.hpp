#pragma once

// Property language: UPPAAL-style CTL subset over locations, variables,
// parameters, deviation counters and deadlock.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsm/compile.hpp"

namespace gsm::checker {

enum class Quantifier { AG, EF, AF, EG };

/// `A[]`, `E<>`, `A<>`, `E[]`.
std::string_view to_string(Quantifier q);

struct PropertyError : std::runtime_error {
  PropertyError(SourcePos p, const std::string& msg) : std::runtime_error(msg), pos(p) {}
  SourcePos pos;
};

/// Comparison operand. `name` is the spelling as written (may be dotted);
/// resolution fills the remaining fields.
struct Operand {
  enum class Kind { Unresolved, Const, Input, Local, Counter };
  Kind kind = Kind::Unresolved;
  std::string name;
  Value value;                            // Const
  std::size_t process = 0;                // Input (owner), Local, Counter
  bool physician = false;                 // Local
  std::optional<std::size_t> only_in;     // Counter: organ state index filter
  SourcePos pos;
};

struct PropExpr {
  enum class Kind { True, False, Deadlock, Not, And, Or, Imply, Loc, Compare };
  Kind kind = Kind::True;
  std::vector<PropExpr> args;
  // Loc
  std::string automaton;
  std::string state;
  std::size_t process = 0;
  bool physician = false;
  std::size_t state_index = 0;
  // Compare
  CmpOp op = CmpOp::Eq;
  Operand lhs;
  Operand rhs;
  SourcePos pos;
};

struct PropertyAst {
  Quantifier quantifier = Quantifier::AG;
  PropExpr body;
  std::string text;
};

/// Syntax only; names stay unresolved.
PropertyAst parse_property(std::string_view text);

/// Binds names against a compiled pack. Throws PropertyError for unknown
/// location predicates, names and ill-typed comparisons.
///
/// Automaton spellings: `X`, `X_BestPractice`, `XBP` (organ), `X_Physician`
/// (physician twin). Variables: inputs, parameters, `X.v` / `X_v` (organ
/// local), `X_Physician.v` / `Physician_X_v` (physician local). Counters:
/// `X.counter`, `X_DeviationCounter`, and `S_DeviationCounter` for a state
/// S, which reads the owning process counter while its organ is at S and 0
/// otherwise.
void resolve_property(PropertyAst& ast, const CompiledPack& pack);

/// Parse + resolve.
PropertyAst compile_property(std::string_view text, const CompiledPack& pack);

/// Processes whose state the body reads (sorted); `deadlock` reads all.
std::vector<std::size_t> processes_read(const PropExpr& e, std::size_t process_count);

/// Largest integer constant compared against a counter, if any.
std::optional<std::int64_t> max_counter_constant(const PropExpr& e);

}  // namespace gsm::checker
