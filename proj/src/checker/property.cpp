#include "gsm/checker/property.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "gsm/lexer.hpp"

namespace gsm::checker {

std::string_view to_string(Quantifier q) {
  switch (q) {
    case Quantifier::AG: return "A[]";
    case Quantifier::EF: return "E<>";
    case Quantifier::AF: return "A<>";
    case Quantifier::EG: return "E[]";
  }
  return "?";
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

class PropParser {
 public:
  explicit PropParser(TokenStream ts) : ts_(std::move(ts)) {}

  PropertyAst parse() {
    PropertyAst ast;
    const Token& q = ts_.expect_ident("quantifier A[], E<>, A<> or E[]");
    if (q.text != "A" && q.text != "E") throw PropertyError(q.pos, "expected quantifier but found '" + q.text + "'");
    if (ts_.accept("[")) {
      ts_.expect("]");
      ast.quantifier = q.text == "A" ? Quantifier::AG : Quantifier::EG;
    } else if (ts_.accept("<")) {
      ts_.expect(">");
      ast.quantifier = q.text == "A" ? Quantifier::AF : Quantifier::EF;
    } else {
      ts_.fail("expected '[]' or '<>' after quantifier");
    }
    ast.body = parse_imply();
    if (!ts_.at_end()) ts_.fail("unexpected " + describe(ts_.peek()) + " after formula");
    return ast;
  }

 private:
  bool word(std::string_view w) const { return ts_.peek().kind == Token::Kind::Ident && iequals(ts_.peek().text, w); }

  PropExpr node(PropExpr::Kind k, SourcePos pos, std::vector<PropExpr> args = {}) {
    PropExpr e;
    e.kind = k;
    e.pos = pos;
    e.args = std::move(args);
    return e;
  }

  PropExpr parse_imply() {
    PropExpr lhs = parse_or();
    if (word("imply") || ts_.peek().is("==>")) {
      ts_.next();
      PropExpr rhs = parse_imply();
      const SourcePos pos = lhs.pos;
      return node(PropExpr::Kind::Imply, pos, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  PropExpr parse_or() {
    PropExpr lhs = parse_and();
    while (ts_.peek().is("||") || word("or")) {
      ts_.next();
      const SourcePos pos = lhs.pos;
      lhs = node(PropExpr::Kind::Or, pos, {std::move(lhs), parse_and()});
    }
    return lhs;
  }

  PropExpr parse_and() {
    PropExpr lhs = parse_unary();
    while (ts_.peek().is("&&") || word("and")) {
      ts_.next();
      const SourcePos pos = lhs.pos;
      lhs = node(PropExpr::Kind::And, pos, {std::move(lhs), parse_unary()});
    }
    return lhs;
  }

  PropExpr parse_unary() {
    const Token& t = ts_.peek();
    if (t.is("!") || word("not")) {
      ts_.next();
      return node(PropExpr::Kind::Not, t.pos, {parse_unary()});
    }
    if (t.is("(")) {
      ts_.next();
      PropExpr e = parse_imply();
      ts_.expect(")");
      return e;
    }
    if (word("deadlock")) {
      ts_.next();
      return node(PropExpr::Kind::Deadlock, t.pos);
    }
    if (t.is_word("true") || t.is_word("false")) {
      ts_.next();
      return node(t.text == "true" ? PropExpr::Kind::True : PropExpr::Kind::False, t.pos);
    }
    Operand lhs = parse_operand();
    CmpOp op;
    const Token& o = ts_.peek();
    if (o.is("==")) op = CmpOp::Eq;
    else if (o.is("!=")) op = CmpOp::Ne;
    else if (o.is("<")) op = CmpOp::Lt;
    else if (o.is("<=")) op = CmpOp::Le;
    else if (o.is(">")) op = CmpOp::Gt;
    else if (o.is(">=")) op = CmpOp::Ge;
    else {
      // A bare name is a location predicate `Automaton.State`.
      const auto dot = lhs.name.find('.');
      if (lhs.kind == Operand::Kind::Const || dot == std::string::npos) {
        throw PropertyError(lhs.pos, "expected a location predicate Automaton.State or a comparison, found '" +
                                         (lhs.name.empty() ? lhs.value.str() : lhs.name) + "'");
      }
      PropExpr e = node(PropExpr::Kind::Loc, lhs.pos);
      e.automaton = lhs.name.substr(0, dot);
      e.state = lhs.name.substr(dot + 1);
      return e;
    }
    ts_.next();
    PropExpr e = node(PropExpr::Kind::Compare, lhs.pos);
    e.op = op;
    e.lhs = std::move(lhs);
    e.rhs = parse_operand();
    return e;
  }

  Operand parse_operand() {
    Operand out;
    out.pos = ts_.peek().pos;
    const bool negative = ts_.accept("-");
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Int) {
      ts_.next();
      const std::int64_t v = std::stoll(t.text);
      out.kind = Operand::Kind::Const;
      out.value = Value::integer(negative ? -v : v);
      return out;
    }
    if (t.kind == Token::Kind::Decimal) {
      ts_.next();
      auto d = Decimal::parse(t.text);
      if (!d) throw PropertyError(t.pos, "decimal literal '" + t.text + "' has too many fractional digits");
      out.kind = Operand::Kind::Const;
      out.value = Value::decimal(negative ? Decimal::from_micros(-d->micros()) : *d);
      return out;
    }
    if (negative) ts_.fail("expected a number after '-'");
    out.name = ts_.expect_ident("name or number").text;
    if (ts_.accept(".")) out.name += "." + ts_.expect_ident("name after '.'").text;
    return out;
  }

  TokenStream ts_;
};

struct AutomatonRef {
  std::size_t process;
  bool physician;
};

class Resolver {
 public:
  explicit Resolver(const CompiledPack& pack) : pack_(pack) {}

  void resolve(PropExpr& e) {
    switch (e.kind) {
      case PropExpr::Kind::True:
      case PropExpr::Kind::False:
      case PropExpr::Kind::Deadlock: return;
      case PropExpr::Kind::Not:
      case PropExpr::Kind::And:
      case PropExpr::Kind::Or:
      case PropExpr::Kind::Imply:
        for (auto& a : e.args) resolve(a);
        return;
      case PropExpr::Kind::Loc: resolve_location(e); return;
      case PropExpr::Kind::Compare: resolve_compare(e); return;
    }
  }

 private:
  std::optional<AutomatonRef> automaton(std::string_view n) const {
    for (std::size_t i = 0; i < pack_.size(); ++i) {
      const std::string& a = pack_.source.automata[i].name;
      if (n == a || n == a + "_BestPractice" || n == a + "BP") return AutomatonRef{i, false};
      if (n == a + "_Physician" || n == "Physician_" + a) return AutomatonRef{i, true};
    }
    return std::nullopt;
  }

  const Automaton& source(std::size_t p) const { return pack_.source.automata[p]; }
  const Automaton& exec(const AutomatonRef& r) const { return r.physician ? pack_.physicians[r.process] : pack_.organs[r.process]; }

  void resolve_location(PropExpr& e) {
    auto ref = automaton(e.automaton);
    if (!ref) throw PropertyError(e.pos, "unknown location predicate '" + e.automaton + "." + e.state + "': no automaton '" + e.automaton + "'");
    auto idx = source(ref->process).resolve_state(e.state);
    if (!idx) {
      throw PropertyError(e.pos, "unknown location predicate '" + e.automaton + "." + e.state + "': '" +
                                     source(ref->process).name + "' has no state '" + e.state + "'");
    }
    e.process = ref->process;
    e.physician = ref->physician;
    e.state_index = *idx;
  }

  bool bind_local(Operand& o, const AutomatonRef& ref, std::string_view var) const {
    const LocalVar* l = exec(ref).find_local(var);
    if (!l) return false;
    o.kind = Operand::Kind::Local;
    o.process = ref.process;
    o.physician = ref.physician;
    o.name = std::string(var);
    return true;
  }

  void bind(Operand& o) const {
    if (o.kind != Operand::Kind::Unresolved) return;
    const std::string n = o.name;
    if (auto dot = n.find('.'); dot != std::string::npos) {
      const std::string head = n.substr(0, dot);
      const std::string tail = n.substr(dot + 1);
      auto ref = automaton(head);
      if (!ref) throw PropertyError(o.pos, "unknown automaton '" + head + "' in '" + n + "'");
      if (!ref->physician && (tail == "counter" || tail == "DeviationCounter")) {
        o.kind = Operand::Kind::Counter;
        o.process = ref->process;
        return;
      }
      if (bind_local(o, *ref, tail)) return;
      throw PropertyError(o.pos, "'" + head + "' has no variable '" + tail + "'");
    }
    if (const Automaton* owner = pack_.source.input_owner(n)) {
      o.kind = Operand::Kind::Input;
      o.process = *pack_.source.automaton_index(owner->name);
      return;
    }
    if (auto it = pack_.params.find(n); it != pack_.params.end()) {
      o.kind = Operand::Kind::Const;
      o.value = it->second;
      return;
    }
    const std::string suffix = "_DeviationCounter";
    if (n.size() > suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string head = n.substr(0, n.size() - suffix.size());
      if (auto ref = automaton(head); ref && !ref->physician) {
        o.kind = Operand::Kind::Counter;
        o.process = ref->process;
        return;
      }
      std::vector<std::pair<std::size_t, std::size_t>> owners;
      for (std::size_t p = 0; p < pack_.size(); ++p) {
        if (auto s = source(p).resolve_state(head)) owners.emplace_back(p, *s);
      }
      if (owners.size() == 1) {
        o.kind = Operand::Kind::Counter;
        o.process = owners[0].first;
        o.only_in = owners[0].second;
        return;
      }
      if (owners.size() > 1) throw PropertyError(o.pos, "'" + n + "' is ambiguous: state '" + head + "' exists in several automata");
    }
    // Underscore spellings of locals: Physician_X_v, X_Physician_v, X_v.
    for (std::size_t p = 0; p < pack_.size(); ++p) {
      const std::string& a = source(p).name;
      for (const auto& [prefix, phys] : {std::pair{"Physician_" + a + "_", true}, std::pair{a + "_Physician_", true},
                                         std::pair{a + "_", false}}) {
        if (n.size() > prefix.size() && n.compare(0, prefix.size(), prefix) == 0 &&
            bind_local(o, AutomatonRef{p, phys}, n.substr(prefix.size()))) {
          return;
        }
      }
    }
  }

  const TypeSpec* type_of(const Operand& o) const {
    switch (o.kind) {
      case Operand::Kind::Input: return &source(o.process).find_input(o.name)->type;
      case Operand::Kind::Local: {
        const Automaton& a = o.physician ? pack_.physicians[o.process] : pack_.organs[o.process];
        return &a.find_local(o.name)->type;
      }
      default: return nullptr;
    }
  }

  ValueType value_type(const Operand& o) const {
    if (o.kind == Operand::Kind::Const) return o.value.type();
    if (o.kind == Operand::Kind::Counter) return ValueType::Int;
    return type_of(o)->kind;
  }

  void resolve_compare(PropExpr& e) {
    bind(e.lhs);
    bind(e.rhs);
    auto as_literal = [&](Operand& side, const Operand& other) {
      const TypeSpec* t = type_of(other);
      if (other.kind != Operand::Kind::Unresolved && t && t->kind == ValueType::Enum && t->has_literal(side.name)) {
        side.kind = Operand::Kind::Const;
        side.value = Value::enumerator(side.name);
        return;
      }
      throw PropertyError(side.pos, "unknown name '" + side.name + "'");
    };
    if (e.lhs.kind == Operand::Kind::Unresolved) as_literal(e.lhs, e.rhs);
    if (e.rhs.kind == Operand::Kind::Unresolved) as_literal(e.rhs, e.lhs);
    const bool l_enum = value_type(e.lhs) == ValueType::Enum;
    const bool r_enum = value_type(e.rhs) == ValueType::Enum;
    if (l_enum != r_enum) throw PropertyError(e.pos, "type mismatch: cannot compare an enum with a number");
    if (l_enum && e.op != CmpOp::Eq && e.op != CmpOp::Ne) {
      throw PropertyError(e.pos, "type mismatch: operator " + std::string(to_string(e.op)) + " is not defined for enum values");
    }
  }

  const CompiledPack& pack_;
};

void collect_processes(const PropExpr& e, std::set<std::size_t>& out, std::size_t n) {
  auto operand = [&](const Operand& o) {
    if (o.kind == Operand::Kind::Input || o.kind == Operand::Kind::Local || o.kind == Operand::Kind::Counter) {
      out.insert(o.process);
    }
  };
  switch (e.kind) {
    case PropExpr::Kind::Deadlock:
      for (std::size_t i = 0; i < n; ++i) out.insert(i);
      break;
    case PropExpr::Kind::Loc: out.insert(e.process); break;
    case PropExpr::Kind::Compare:
      operand(e.lhs);
      operand(e.rhs);
      break;
    default: break;
  }
  for (const auto& a : e.args) collect_processes(a, out, n);
}

}  // namespace

PropertyAst parse_property(std::string_view text) {
  std::vector<Token> tokens;
  try {
    tokens = tokenize(text);
  } catch (const SyntaxError& e) {
    throw PropertyError(e.pos, e.what());
  }
  try {
    PropertyAst ast = PropParser(TokenStream(std::move(tokens))).parse();
    ast.text = std::string(text);
    return ast;
  } catch (const SyntaxError& e) {
    throw PropertyError(e.pos, e.what());
  }
}

void resolve_property(PropertyAst& ast, const CompiledPack& pack) { Resolver(pack).resolve(ast.body); }

PropertyAst compile_property(std::string_view text, const CompiledPack& pack) {
  PropertyAst ast = parse_property(text);
  resolve_property(ast, pack);
  return ast;
}

std::vector<std::size_t> processes_read(const PropExpr& e, std::size_t process_count) {
  std::set<std::size_t> s;
  collect_processes(e, s, process_count);
  return {s.begin(), s.end()};
}

std::optional<std::int64_t> max_counter_constant(const PropExpr& e) {
  std::optional<std::int64_t> best;
  auto consider = [&](const Operand& counter, const Operand& other) {
    if (counter.kind != Operand::Kind::Counter || other.kind != Operand::Kind::Const || !other.value.is_numeric()) return;
    // Ceiling so that `counter > 2.5` needs distinguishing up to 3.
    const std::int64_t micros = other.value.numeric().micros();
    const std::int64_t c = micros >= 0 ? (micros + Decimal::kScale - 1) / Decimal::kScale : micros / Decimal::kScale;
    if (!best || c > *best) best = c;
  };
  if (e.kind == PropExpr::Kind::Compare) {
    consider(e.lhs, e.rhs);
    consider(e.rhs, e.lhs);
  }
  for (const auto& a : e.args) {
    if (auto m = max_counter_constant(a); m && (!best || *m > *best)) best = m;
  }
  return best;
}

}  // namespace gsm::checker
