#include "gsm/compile.hpp"

#include <algorithm>

#include "gsm/lower.hpp"
#include "gsm/parser.hpp"
#include "gsm/physician.hpp"
#include "gsm/validate.hpp"

namespace gsm {

std::optional<std::size_t> CompiledPack::organ_index(std::string_view name) const {
  for (std::size_t i = 0; i < organs.size(); ++i) {
    if (organs[i].name == name) return i;
  }
  return std::nullopt;
}

CompiledPack compile(const ModelPack& pack) {
  Diagnostics diags = validate(pack);
  if (has_errors(diags)) {
    std::string first;
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) {
        first = d.message;
        break;
      }
    }
    throw CompileError("pack '" + pack.name + "' does not validate: " + first, std::move(diags));
  }
  CompiledPack out;
  out.source = pack;
  out.params = pack.param_values();
  for (const auto& a : pack.automata) {
    out.organs.push_back(lower_automaton(a, pack));
    out.physicians.push_back(lower_automaton(derive_physician_automaton(a), pack));
  }
  return out;
}

CompiledPack compile_source(std::string_view text) {
  ParseResult parsed = parse_model(text);
  if (!parsed.ok()) {
    const std::string first = parsed.diagnostics.empty() ? "parse failed" : parsed.diagnostics.front().format("<model>");
    throw CompileError(first, std::move(parsed.diagnostics));
  }
  return compile(*parsed.pack);
}

ModelPack with_params(ModelPack pack, const Valuation& overrides) {
  for (const auto& [name, value] : overrides) {
    auto it = std::find_if(pack.params.begin(), pack.params.end(), [&](const Param& p) { return p.name == name; });
    if (it == pack.params.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
    Value v = value;
    if (!it->type.admits(v)) throw std::invalid_argument("value " + v.str() + " does not fit parameter '" + name + "'");
    it->value = it->type.coerce(v);
  }
  return pack;
}

}  // namespace gsm
