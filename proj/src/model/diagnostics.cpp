#include "gsm/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace gsm {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

std::string Diagnostic::format(std::string_view file) const {
  std::string out(file);
  out += ':' + std::to_string(pos.line) + ':' + std::to_string(pos.column) + ": ";
  out += to_string(severity);
  out += ": ";
  out += message;
  return out;
}

bool has_errors(const Diagnostics& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::size_t count(const Diagnostics& diags, Severity s) {
  return static_cast<std::size_t>(std::count_if(
      diags.begin(), diags.end(), [s](const Diagnostic& d) { return d.severity == s; }));
}

void sort_diagnostics(Diagnostics& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.pos.line, a.pos.column, a.message) <
           std::tie(b.pos.line, b.pos.column, b.message);
  });
}

}  // namespace gsm
