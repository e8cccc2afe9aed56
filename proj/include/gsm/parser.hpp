#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gsm/diagnostics.hpp"
#include "gsm/model.hpp"

namespace gsm {

struct ParseResult {
  std::optional<ModelPack> pack;  // set only when there are no errors
  Diagnostics diagnostics;

  bool ok() const { return pack.has_value(); }
};

/// Parses and resolves one `.gsm` pack: wildcard sources are expanded,
/// enum literals resolved and every guard type-checked.
ParseResult parse_model(std::string_view text);

/// Canonical `.gsm` text; `parse_model(print_model(p))` reproduces `p`.
std::string print_model(const ModelPack& pack);
std::string print_expr(const Expr& e);
std::string print_action(const Action& a);

/// Double-quoted, escaped string literal.
std::string quote(std::string_view s);

}  // namespace gsm
