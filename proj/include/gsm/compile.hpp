#pragma once

#include <stdexcept>

#include "gsm/diagnostics.hpp"
#include "gsm/model.hpp"

namespace gsm {

/// Executable form of a pack: lowered organ automata, their lowered
/// physician twins (same index), and the parameter valuation.
struct CompiledPack {
  ModelPack source;
  std::vector<Automaton> organs;
  std::vector<Automaton> physicians;
  Valuation params;

  std::size_t size() const { return organs.size(); }
  std::optional<std::size_t> organ_index(std::string_view name) const;
};

struct CompileError : std::runtime_error {
  CompileError(const std::string& what, Diagnostics d) : std::runtime_error(what), diagnostics(std::move(d)) {}
  Diagnostics diagnostics;
};

/// Validates, lowers and derives physician twins. Throws CompileError when
/// validation reports errors.
CompiledPack compile(const ModelPack& pack);

/// Parses then compiles; parse diagnostics become a CompileError.
CompiledPack compile_source(std::string_view text);

/// Replaces parameter defaults. Unknown names and ill-typed values throw
/// std::invalid_argument.
ModelPack with_params(ModelPack pack, const Valuation& overrides);

}  // namespace gsm
