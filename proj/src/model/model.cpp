#include "gsm/model.hpp"

#include <algorithm>

namespace gsm {

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

Expr Expr::boolean(bool v) {
  Expr e;
  e.kind = Kind::Bool;
  e.flag = v;
  return e;
}

Expr Expr::literal(Value v) {
  Expr e;
  e.kind = Kind::Literal;
  e.value = std::move(v);
  return e;
}

Expr Expr::ref(std::string name) {
  Expr e;
  e.kind = Kind::Ref;
  e.name = std::move(name);
  return e;
}

Expr Expr::negate(Expr inner) {
  Expr e;
  e.kind = Kind::Not;
  e.args.push_back(std::move(inner));
  return e;
}

Expr Expr::conj(Expr a, Expr b) {
  Expr e;
  e.kind = Kind::And;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::disj(Expr a, Expr b) {
  Expr e;
  e.kind = Kind::Or;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::compare(CmpOp op, Expr a, Expr b) {
  Expr e;
  e.kind = Kind::Compare;
  e.op = op;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::confirm(std::string state) {
  Expr e;
  e.kind = Kind::Confirm;
  e.name = std::move(state);
  return e;
}

Expr Expr::jump(std::string state) {
  Expr e;
  e.kind = Kind::Jump;
  e.name = std::move(state);
  return e;
}

namespace {
void collect_names(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Ref) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    return;
  }
  for (const auto& a : e.args) collect_names(a, out);
}
}  // namespace

std::vector<std::string> referenced_names(const Expr& e) {
  std::vector<std::string> out;
  collect_names(e, out);
  return out;
}

Action Action::emit(std::string event, std::optional<Value> payload) {
  Action a;
  a.kind = Kind::Emit;
  a.name = std::move(event);
  a.payload = std::move(payload);
  return a;
}

Action Action::set(std::string var, Expr value) {
  Action a;
  a.kind = Kind::Set;
  a.name = std::move(var);
  a.value = std::move(value);
  return a;
}

std::optional<std::size_t> Automaton::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == state) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Automaton::resolve_state(std::string_view name_or_alias) const {
  if (auto idx = state_index(name_or_alias)) return idx;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& al = states[i].aliases;
    if (std::find(al.begin(), al.end(), name_or_alias) != al.end()) return i;
  }
  return std::nullopt;
}

const InputDecl* Automaton::find_input(std::string_view n) const {
  for (const auto& in : inputs) {
    if (in.name == n) return &in;
  }
  return nullptr;
}

const LocalVar* Automaton::find_local(std::string_view n) const {
  for (const auto& v : locals) {
    if (v.name == n) return &v;
  }
  return nullptr;
}

bool Automaton::declares_event(std::string_view e) const {
  return std::find(events.begin(), events.end(), e) != events.end();
}

std::vector<std::string> Automaton::state_names() const {
  std::vector<std::string> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.name);
  return out;
}

const Automaton* ModelPack::find_automaton(std::string_view n) const {
  for (const auto& a : automata) {
    if (a.name == n) return &a;
  }
  return nullptr;
}

std::optional<std::size_t> ModelPack::automaton_index(std::string_view n) const {
  for (std::size_t i = 0; i < automata.size(); ++i) {
    if (automata[i].name == n) return i;
  }
  return std::nullopt;
}

const Param* ModelPack::find_param(std::string_view n) const {
  for (const auto& p : params) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const Automaton* ModelPack::input_owner(std::string_view n) const {
  for (const auto& a : automata) {
    if (a.find_input(n)) return &a;
  }
  return nullptr;
}

Valuation ModelPack::param_values() const {
  Valuation out;
  for (const auto& p : params) out.emplace(p.name, p.value);
  return out;
}

}  // namespace gsm
