#include <sstream>

#include "gsm/parser.hpp"

namespace gsm {

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Or: return 1;
    case Expr::Kind::And: return 2;
    default: return 3;
  }
}

std::string print_type(const TypeSpec& t) {
  std::string out;
  switch (t.kind) {
    case ValueType::Int: out = "int"; break;
    case ValueType::Decimal: out = "decimal"; break;
    case ValueType::Enum: {
      out = "enum {";
      for (std::size_t i = 0; i < t.literals.size(); ++i) {
        if (i) out += ", ";
        out += t.literals[i];
      }
      return out + "}";
    }
  }
  if (t.range) out += " range " + t.range->lo.str() + ".." + t.range->hi.str() + " step " + t.range->step.str();
  return out;
}

std::string print_actions(const std::vector<Action>& actions) {
  std::string out = "{";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    out += i ? "; " : " ";
    out += print_action(actions[i]);
  }
  return out + (actions.empty() ? "}" : " }");
}

}  // namespace

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Bool: return e.flag ? "true" : "false";
    case Expr::Kind::Literal: return e.value.str();
    case Expr::Kind::Ref: return e.name;
    case Expr::Kind::Confirm: return "confirm(" + e.name + ")";
    case Expr::Kind::Jump: return "jump(" + e.name + ")";
    case Expr::Kind::Not: {
      const Expr& c = e.args[0];
      const bool wrap = c.kind == Expr::Kind::And || c.kind == Expr::Kind::Or || c.kind == Expr::Kind::Compare;
      return wrap ? "!(" + print_expr(c) + ")" : "!" + print_expr(c);
    }
    case Expr::Kind::Compare:
      return print_expr(e.args[0]) + " " + std::string(to_string(e.op)) + " " + print_expr(e.args[1]);
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const int p = precedence(e);
      std::string l = print_expr(e.args[0]);
      std::string r = print_expr(e.args[1]);
      if (precedence(e.args[0]) < p) l = "(" + l + ")";
      if (precedence(e.args[1]) <= p) r = "(" + r + ")";
      return l + (e.kind == Expr::Kind::And ? " && " : " || ") + r;
    }
  }
  return "?";
}

std::string print_action(const Action& a) {
  if (a.kind == Action::Kind::Emit) {
    std::string out = "emit " + a.name;
    if (a.payload) out += "(" + a.payload->str() + ")";
    return out;
  }
  return "set " + a.name + " = " + print_expr(a.value);
}

std::string print_model(const ModelPack& pack) {
  std::ostringstream out;
  out << "pack " << pack.name << "\n";
  if (!pack.params.empty()) out << "\n";
  for (const auto& p : pack.params) {
    out << "param " << p.name << ": " << print_type(p.type) << " = " << p.value.str() << "\n";
  }
  out << "\nprotocol {\n  t_short " << pack.protocol.t_short << "\n  t_long " << pack.protocol.t_long << "\n}\n";

  for (const auto& a : pack.automata) {
    out << "\nautomaton " << a.name << " {\n";
    for (const auto& in : a.inputs) {
      out << "  input " << in.name << ": " << print_type(in.type);
      if (!in.unit.empty()) out << " unit " << quote(in.unit);
      out << "\n";
    }
    for (const auto& v : a.locals) {
      if (v.clock) out << "  clock " << v.name << "\n";
      else out << "  var " << v.name << ": " << print_type(v.type) << " = " << v.initial.str() << "\n";
    }
    if (!a.events.empty()) {
      out << "  event ";
      for (std::size_t i = 0; i < a.events.size(); ++i) out << (i ? ", " : "") << a.events[i];
      out << "\n";
    }
    out << "  initial " << a.initial << "\n";
    for (const auto& s : a.states) {
      out << "  state " << s.name;
      if (!s.aliases.empty()) {
        out << " aka ";
        for (std::size_t i = 0; i < s.aliases.size(); ++i) out << (i ? ", " : "") << s.aliases[i];
      }
      if (s.has_actions()) {
        out << " {\n";
        if (!s.entry.empty()) out << "    entry " << print_actions(s.entry) << "\n";
        if (!s.exit.empty()) out << "    exit " << print_actions(s.exit) << "\n";
        for (const auto& t : s.timers) out << "    every " << t.duration << " " << print_actions(t.actions) << "\n";
        out << "  }";
      }
      out << "\n";
    }
    for (const auto& t : a.transitions) {
      out << "  trans " << t.source << " -> " << t.target;
      if (!t.guard.is_true_literal()) out << " when " << print_expr(t.guard);
      if (t.internal) out << " internal";
      if (!t.actions.empty()) out << " " << print_actions(t.actions);
      out << "\n";
    }
    out << "}\n";
  }

  if (!pack.rules.empty()) out << "\n";
  for (const auto& r : pack.rules) {
    out << "inconsistency " << quote(r.id) << " when " << print_expr(r.condition);
    if (!r.message.empty()) out << " message " << quote(r.message);
    out << "\n";
  }

  if (!pack.guidelines.rules.empty()) {
    out << "\nguidelines {\n";
    for (const auto& g : pack.guidelines.rules) {
      out << "  (";
      for (std::size_t i = 0; i < g.pattern.size(); ++i) {
        if (i) out << ", ";
        const std::string& owner = i < pack.automata.size() ? pack.automata[i].name : std::string("?");
        if (g.pattern[i]) out << owner << "=" << *g.pattern[i];
        else out << "*";
      }
      out << ") -> ";
      for (std::size_t i = 0; i < g.texts.size(); ++i) out << (i ? ", " : "") << quote(g.texts[i]);
      out << "\n";
    }
    out << "}\n";
  }

  if (!pack.discretization.empty()) {
    out << "\ndiscretization {\n";
    for (const auto& d : pack.discretization) {
      out << "  " << d.input << ": {";
      for (std::size_t i = 0; i < d.values.size(); ++i) out << (i ? ", " : "") << d.values[i].str();
      out << "}\n";
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace gsm
