#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gsm/model.hpp"

namespace gsm {

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity s);

struct Diagnostic {
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string message;

  /// `file:line:col: severity: message`
  std::string format(std::string_view file) const;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& diags);
std::size_t count(const Diagnostics& diags, Severity s);

/// Stable order: line, column, then message text.
void sort_diagnostics(Diagnostics& diags);

}  // namespace gsm
