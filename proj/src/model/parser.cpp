#include "gsm/parser.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "gsm/lexer.hpp"

namespace gsm {

namespace {

const std::set<std::string, std::less<>> kTopLevel = {
    "pack", "param", "automaton", "inconsistency", "guidelines", "discretization", "protocol"};

struct PatternEntry {
  std::optional<std::string> automaton;
  std::optional<std::string> state;  // nullopt = wildcard
  SourcePos pos;
};

struct RawPack {
  ModelPack pack;
  bool has_name = false;
  std::vector<std::vector<PatternEntry>> patterns;  // parallel to guidelines.rules
};

// ---------------------------------------------------------------------------
// Syntax

class Parser {
 public:
  Parser(TokenStream ts, Diagnostics& diags) : ts_(std::move(ts)), diags_(diags) {}

  RawPack parse_file() {
    RawPack raw;
    while (!ts_.at_end()) {
      const std::size_t start = ts_.position();
      try {
        parse_item(raw);
      } catch (const SyntaxError& e) {
        diags_.push_back({Severity::Error, e.pos, e.what()});
        if (ts_.position() == start) ts_.next();
        while (!ts_.at_end() &&
               !(ts_.peek().kind == Token::Kind::Ident && kTopLevel.count(ts_.peek().text))) {
          ts_.next();
        }
      }
    }
    return raw;
  }

  Expr parse_expr() { return parse_or(); }

 private:
  void parse_item(RawPack& raw) {
    const Token& t = ts_.peek();
    if (t.is_word("pack")) {
      ts_.next();
      if (raw.has_name) ts_.fail("duplicate pack header");
      raw.pack.name = ts_.expect_ident("pack name").text;
      raw.has_name = true;
    } else if (t.is_word("param")) {
      raw.pack.params.push_back(parse_param());
    } else if (t.is_word("automaton")) {
      raw.pack.automata.push_back(parse_automaton());
    } else if (t.is_word("inconsistency")) {
      raw.pack.rules.push_back(parse_rule());
    } else if (t.is_word("guidelines")) {
      parse_guidelines(raw);
    } else if (t.is_word("discretization")) {
      parse_discretization(raw.pack);
    } else if (t.is_word("protocol")) {
      parse_protocol(raw.pack);
    } else {
      ts_.fail("expected a top-level declaration but found " + describe(t));
    }
  }

  Param parse_param() {
    Param p;
    p.pos = ts_.expect_word("param").pos;
    p.name = ts_.expect_ident("parameter name").text;
    ts_.expect(":");
    p.type = parse_type();
    ts_.expect("=");
    p.value = parse_literal();
    return p;
  }

  TypeSpec parse_type() {
    const Token& t = ts_.expect_ident("type");
    if (t.text == "enum") {
      TypeSpec spec = TypeSpec::enumeration({});
      ts_.expect("{");
      do {
        spec.literals.push_back(ts_.expect_ident("enum literal").text);
      } while (ts_.accept(","));
      ts_.expect("}");
      return spec;
    }
    TypeSpec spec;
    if (t.text == "int") spec = TypeSpec::integer();
    else if (t.text == "decimal") spec = TypeSpec::decimal();
    else throw SyntaxError(t.pos, "unknown type '" + t.text + "' (expected int, decimal or enum)");
    if (ts_.accept_word("range")) {
      NumericRange r;
      r.lo = parse_number();
      ts_.expect("..");
      r.hi = parse_number();
      ts_.expect_word("step");
      r.step = parse_number();
      spec.range = r;
    }
    return spec;
  }

  Value parse_number() {
    bool negative = ts_.accept("-");
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Int) {
      ts_.next();
      std::int64_t v = std::stoll(t.text);
      return Value::integer(negative ? -v : v);
    }
    if (t.kind == Token::Kind::Decimal) {
      ts_.next();
      auto d = Decimal::parse(t.text);
      if (!d) throw SyntaxError(t.pos, "decimal literal '" + t.text + "' has more than six fractional digits");
      return Value::decimal(negative ? Decimal::from_micros(-d->micros()) : *d);
    }
    ts_.fail("expected a number but found " + describe(t));
  }

  Value parse_literal() {
    if (ts_.peek().kind == Token::Kind::Ident) return Value::enumerator(ts_.next().text);
    return parse_number();
  }

  Automaton parse_automaton() {
    Automaton a;
    a.pos = ts_.expect_word("automaton").pos;
    a.name = ts_.expect_ident("automaton name").text;
    ts_.expect("{");
    while (!ts_.accept("}")) {
      const Token& t = ts_.peek();
      if (t.is_word("input")) {
        ts_.next();
        InputDecl in;
        in.pos = t.pos;
        in.name = ts_.expect_ident("input name").text;
        ts_.expect(":");
        in.type = parse_type();
        if (ts_.accept_word("unit")) in.unit = ts_.expect_kind(Token::Kind::String, "unit string").text;
        a.inputs.push_back(std::move(in));
      } else if (t.is_word("var")) {
        ts_.next();
        LocalVar v;
        v.pos = t.pos;
        v.name = ts_.expect_ident("variable name").text;
        ts_.expect(":");
        v.type = parse_type();
        ts_.expect("=");
        v.initial = parse_literal();
        a.locals.push_back(std::move(v));
      } else if (t.is_word("clock")) {
        ts_.next();
        LocalVar v;
        v.pos = t.pos;
        v.name = ts_.expect_ident("clock name").text;
        v.type = TypeSpec::integer();
        v.initial = Value::integer(0);
        v.clock = true;
        a.locals.push_back(std::move(v));
      } else if (t.is_word("event")) {
        ts_.next();
        do {
          a.events.push_back(ts_.expect_ident("event name").text);
        } while (ts_.accept(","));
      } else if (t.is_word("initial")) {
        ts_.next();
        if (!a.initial.empty()) throw SyntaxError(t.pos, "automaton '" + a.name + "' declares more than one initial state");
        a.initial = ts_.expect_ident("initial state name").text;
      } else if (t.is_word("state")) {
        a.states.push_back(parse_state());
      } else if (t.is_word("trans")) {
        a.transitions.push_back(parse_transition());
      } else if (t.is_word("region") || t.is_word("composite")) {
        ts_.fail("composite states are not supported; model concurrency as separate automata");
      } else {
        ts_.fail("unexpected " + describe(t) + " in automaton '" + a.name + "'");
      }
    }
    return a;
  }

  State parse_state() {
    State s;
    s.pos = ts_.expect_word("state").pos;
    s.name = ts_.expect_ident("state name").text;
    if (ts_.accept_word("aka")) {
      do {
        s.aliases.push_back(ts_.expect_ident("state alias").text);
      } while (ts_.accept(","));
    }
    if (ts_.accept("{")) {
      while (!ts_.accept("}")) {
        const Token& t = ts_.peek();
        if (t.is_word("entry")) {
          ts_.next();
          auto acts = parse_action_block();
          s.entry.insert(s.entry.end(), acts.begin(), acts.end());
        } else if (t.is_word("exit")) {
          ts_.next();
          auto acts = parse_action_block();
          s.exit.insert(s.exit.end(), acts.begin(), acts.end());
        } else if (t.is_word("every")) {
          ts_.next();
          TimerAction ta;
          ta.pos = t.pos;
          const Token& d = ts_.expect_kind(Token::Kind::Int, "timer duration in milliseconds");
          ta.duration = std::stoll(d.text);
          ts_.accept_word("ms");
          ta.actions = parse_action_block();
          s.timers.push_back(std::move(ta));
        } else if (t.is_word("state")) {
          ts_.fail("composite states are not supported; state '" + s.name + "' cannot contain states");
        } else {
          ts_.fail("unexpected " + describe(t) + " in state '" + s.name + "'");
        }
      }
    }
    return s;
  }

  Transition parse_transition() {
    Transition tr;
    tr.pos = ts_.expect_word("trans").pos;
    if (ts_.accept("*")) tr.source = "*";
    else tr.source = ts_.expect_ident("source state").text;
    ts_.expect("->");
    tr.target = ts_.expect_ident("target state").text;
    if (ts_.accept_word("when")) tr.guard = parse_expr();
    if (ts_.accept_word("internal")) tr.internal = true;
    if (ts_.peek().is("{")) tr.actions = parse_action_block();
    return tr;
  }

  std::vector<Action> parse_action_block() {
    std::vector<Action> out;
    ts_.expect("{");
    while (!ts_.accept("}")) {
      const Token& t = ts_.peek();
      if (t.is_word("emit")) {
        ts_.next();
        Action a = Action::emit(ts_.expect_ident("event name").text);
        a.pos = t.pos;
        if (ts_.accept("(")) {
          a.payload = parse_literal();
          ts_.expect(")");
        }
        out.push_back(std::move(a));
      } else if (t.is_word("set")) {
        ts_.next();
        std::string var = ts_.expect_ident("variable name").text;
        ts_.expect("=");
        Action a = Action::set(std::move(var), parse_operand());
        a.pos = t.pos;
        out.push_back(std::move(a));
      } else {
        ts_.fail("expected 'emit' or 'set' but found " + describe(t));
      }
      ts_.accept(";");
    }
    return out;
  }

  InconsistencyRule parse_rule() {
    InconsistencyRule r;
    r.pos = ts_.expect_word("inconsistency").pos;
    r.id = ts_.expect_kind(Token::Kind::String, "rule id string").text;
    ts_.expect_word("when");
    r.condition = parse_expr();
    if (ts_.accept_word("message")) r.message = ts_.expect_kind(Token::Kind::String, "message string").text;
    return r;
  }

  void parse_guidelines(RawPack& raw) {
    ts_.expect_word("guidelines");
    ts_.expect("{");
    while (!ts_.accept("}")) {
      GuidelineRule rule;
      rule.pos = ts_.expect("(").pos;
      std::vector<PatternEntry> entries;
      do {
        PatternEntry e;
        e.pos = ts_.peek().pos;
        if (!ts_.accept("*")) {
          std::string first = ts_.expect_ident("automaton or state name").text;
          if (ts_.accept("=")) {
            e.automaton = std::move(first);
            if (!ts_.accept("*")) e.state = ts_.expect_ident("state name").text;
          } else {
            e.state = std::move(first);
          }
        }
        entries.push_back(std::move(e));
      } while (ts_.accept(","));
      ts_.expect(")");
      ts_.expect("->");
      do {
        rule.texts.push_back(ts_.expect_kind(Token::Kind::String, "guideline text").text);
      } while (ts_.accept(","));
      raw.pack.guidelines.rules.push_back(std::move(rule));
      raw.patterns.push_back(std::move(entries));
    }
  }

  void parse_discretization(ModelPack& pack) {
    ts_.expect_word("discretization");
    ts_.expect("{");
    while (!ts_.accept("}")) {
      DomainOverride d;
      const Token& name = ts_.expect_ident("input name");
      d.pos = name.pos;
      d.input = name.text;
      ts_.expect(":");
      ts_.expect("{");
      do {
        d.values.push_back(parse_literal());
      } while (ts_.accept(","));
      ts_.expect("}");
      pack.discretization.push_back(std::move(d));
    }
  }

  void parse_protocol(ModelPack& pack) {
    ts_.expect_word("protocol");
    ts_.expect("{");
    while (!ts_.accept("}")) {
      const Token& key = ts_.expect_ident("t_short or t_long");
      const Token& v = ts_.expect_kind(Token::Kind::Int, "milliseconds");
      if (key.text == "t_short") pack.protocol.t_short = std::stoll(v.text);
      else if (key.text == "t_long") pack.protocol.t_long = std::stoll(v.text);
      else throw SyntaxError(key.pos, "unknown protocol setting '" + key.text + "'");
    }
  }

  // expr := or ; or := and ('||' and)* ; and := unary ('&&' unary)*
  Expr parse_or() {
    Expr lhs = parse_and();
    while (ts_.peek().is("||")) {
      const SourcePos pos = lhs.pos;
      ts_.next();
      lhs = Expr::disj(std::move(lhs), parse_and());
      lhs.pos = pos;
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_unary();
    while (ts_.peek().is("&&")) {
      const SourcePos pos = lhs.pos;
      ts_.next();
      lhs = Expr::conj(std::move(lhs), parse_unary());
      lhs.pos = pos;
    }
    return lhs;
  }

  Expr parse_unary() {
    const Token& t = ts_.peek();
    if (t.is("!")) {
      ts_.next();
      Expr e = Expr::negate(parse_unary());
      e.pos = t.pos;
      return e;
    }
    if (t.is("(")) {
      ts_.next();
      Expr e = parse_expr();
      ts_.expect(")");
      return e;
    }
    if (t.is_word("true") || t.is_word("false")) {
      ts_.next();
      Expr e = Expr::boolean(t.text == "true");
      e.pos = t.pos;
      return e;
    }
    if ((t.is_word("confirm") || t.is_word("jump")) && ts_.peek(1).is("(")) {
      ts_.next();
      ts_.next();
      const std::string state = ts_.expect_ident("state name").text;
      ts_.expect(")");
      Expr e = t.text == "confirm" ? Expr::confirm(state) : Expr::jump(state);
      e.pos = t.pos;
      return e;
    }
    Expr lhs = parse_operand();
    const Token& op = ts_.peek();
    CmpOp cmp;
    if (op.is("==")) cmp = CmpOp::Eq;
    else if (op.is("!=")) cmp = CmpOp::Ne;
    else if (op.is("<")) cmp = CmpOp::Lt;
    else if (op.is("<=")) cmp = CmpOp::Le;
    else if (op.is(">")) cmp = CmpOp::Gt;
    else if (op.is(">=")) cmp = CmpOp::Ge;
    else throw SyntaxError(lhs.pos, "expected a comparison after " + print_expr(lhs));
    ts_.next();
    Expr e = Expr::compare(cmp, std::move(lhs), parse_operand());
    e.pos = e.args[0].pos;
    return e;
  }

  Expr parse_operand() {
    const Token& t = ts_.peek();
    if (t.kind == Token::Kind::Ident) {
      ts_.next();
      Expr e = Expr::ref(t.text);
      e.pos = t.pos;
      return e;
    }
    Expr e = Expr::literal(parse_number());
    e.pos = t.pos;
    return e;
  }

  TokenStream ts_;
  Diagnostics& diags_;
};

// ---------------------------------------------------------------------------
// Resolution and type checking

struct Operand {
  enum class Kind { Value, Unresolved } kind;
  TypeSpec type;  // for Value
};

class Resolver {
 public:
  explicit Resolver(Diagnostics& diags) : diags_(diags) {}

  void resolve(RawPack& raw) {
    ModelPack& pack = raw.pack;
    if (!raw.has_name) error({1, 1}, "missing 'pack <name>' header");
    if (pack.automata.empty()) error({1, 1}, "pack declares no automaton");

    std::set<std::string, std::less<>> globals;
    for (auto& p : pack.params) {
      if (!globals.insert(p.name).second) error(p.pos, "duplicate parameter '" + p.name + "'");
      if (!p.type.admits(p.value)) {
        error(p.pos, "type mismatch: parameter '" + p.name + "' of type " + std::string(to_string(p.type.kind)) +
                         " cannot hold " + p.value.str());
      } else {
        p.value = p.type.coerce(p.value);
      }
      check_range(p.type, p.pos);
    }
    std::set<std::string, std::less<>> auto_names;
    for (auto& a : pack.automata) {
      if (!auto_names.insert(a.name).second) error(a.pos, "duplicate automaton '" + a.name + "'");
      for (auto& in : a.inputs) {
        if (pack.find_param(in.name)) error(in.pos, "input '" + in.name + "' shadows a parameter");
        else if (!globals.insert(in.name).second) error(in.pos, "duplicate input '" + in.name + "'");
        check_range(in.type, in.pos);
      }
    }
    for (auto& a : pack.automata) resolve_automaton(pack, a);

    std::set<std::string, std::less<>> rule_ids;
    for (auto& r : pack.rules) {
      if (!rule_ids.insert(r.id).second) error(r.pos, "duplicate inconsistency rule '" + r.id + "'");
      resolve_bool(r.condition, [&](std::string_view n) { return global_lookup(pack, n); }, nullptr);
    }
    resolve_guidelines(raw);
    resolve_discretization(pack);
    if (pack.protocol.t_short <= 0 || pack.protocol.t_long <= 0) {
      error({1, 1}, "protocol timers must be positive");
    }
  }

  using Lookup = std::function<const TypeSpec*(std::string_view)>;

 private:
  void error(SourcePos pos, std::string msg) { diags_.push_back({Severity::Error, pos, std::move(msg)}); }

  void check_range(const TypeSpec& t, SourcePos pos) {
    if (!t.range) return;
    const auto& r = *t.range;
    if (t.kind == ValueType::Int &&
        (r.lo.type() != ValueType::Int || r.hi.type() != ValueType::Int || r.step.type() != ValueType::Int)) {
      error(pos, "int range bounds and step must be integers");
    }
    if (r.step.is_numeric() && r.step.numeric() <= Decimal{}) error(pos, "range step must be positive");
    if (r.hi.is_numeric() && r.lo.is_numeric() && r.hi.numeric() < r.lo.numeric()) {
      error(pos, "range upper bound is below lower bound");
    }
  }

  static const TypeSpec* global_lookup(const ModelPack& pack, std::string_view n) {
    if (const Param* p = pack.find_param(n)) return &p->type;
    for (const auto& a : pack.automata) {
      if (const InputDecl* in = a.find_input(n)) return &in->type;
    }
    return nullptr;
  }

  void resolve_automaton(const ModelPack& pack, Automaton& a) {
    std::set<std::string, std::less<>> names;
    for (const auto& s : a.states) {
      if (!names.insert(s.name).second) error(s.pos, "duplicate state '" + s.name + "' in automaton '" + a.name + "'");
    }
    for (const auto& s : a.states) {
      for (const auto& al : s.aliases) {
        if (!names.insert(al).second) error(s.pos, "state alias '" + al + "' clashes with another state name");
      }
    }
    if (a.initial.empty()) {
      error(a.pos, "missing initial state in automaton '" + a.name + "'");
    } else if (auto idx = a.resolve_state(a.initial)) {
      a.initial = a.states[*idx].name;
    } else {
      error(a.pos, "missing initial state: '" + a.initial + "' is not a state of automaton '" + a.name + "'");
    }

    std::set<std::string, std::less<>> locals;
    for (auto& v : a.locals) {
      if (pack.find_param(v.name) || global_lookup(pack, v.name)) {
        error(v.pos, "local variable '" + v.name + "' shadows an input or parameter");
      }
      if (!locals.insert(v.name).second) error(v.pos, "duplicate local variable '" + v.name + "'");
      if (!v.type.admits(v.initial)) {
        error(v.pos, "type mismatch: initial value " + v.initial.str() + " does not fit '" + v.name + "'");
      } else {
        v.initial = v.type.coerce(v.initial);
      }
    }
    std::set<std::string, std::less<>> events;
    for (const auto& e : a.events) {
      if (!events.insert(e).second) error(a.pos, "duplicate event '" + e + "' in automaton '" + a.name + "'");
    }

    const Lookup lookup = [&](std::string_view n) -> const TypeSpec* {
      if (const LocalVar* v = a.find_local(n)) return &v->type;
      if (const InputDecl* in = a.find_input(n)) return &in->type;
      if (const Param* p = pack.find_param(n)) return &p->type;
      return nullptr;
    };

    for (auto& s : a.states) {
      for (auto& act : s.entry) resolve_action(a, act, lookup);
      for (auto& act : s.exit) resolve_action(a, act, lookup);
      for (auto& ta : s.timers) {
        if (ta.duration <= 0) error(ta.pos, "timer duration must be positive");
        for (auto& act : ta.actions) resolve_action(a, act, lookup);
      }
    }

    std::vector<Transition> expanded;
    for (auto& tr : a.transitions) {
      auto tgt = a.resolve_state(tr.target);
      if (!tgt) {
        error(tr.pos, "unknown target state '" + tr.target + "' in automaton '" + a.name + "'");
        continue;
      }
      tr.target = a.states[*tgt].name;
      resolve_bool(tr.guard, lookup, &a);
      for (auto& act : tr.actions) resolve_action(a, act, lookup);
      if (tr.source == "*") {
        for (const auto& s : a.states) {
          if (s.name == tr.target) continue;
          Transition copy = tr;
          copy.source = s.name;
          expanded.push_back(std::move(copy));
        }
        continue;
      }
      auto src = a.resolve_state(tr.source);
      if (!src) {
        error(tr.pos, "unknown source state '" + tr.source + "' in automaton '" + a.name + "'");
        continue;
      }
      tr.source = a.states[*src].name;
      expanded.push_back(std::move(tr));
    }
    a.transitions = std::move(expanded);
  }

  void resolve_action(const Automaton& a, Action& act, const Lookup& lookup) {
    if (act.kind == Action::Kind::Emit) {
      if (!a.declares_event(act.name)) {
        error(act.pos, "event '" + act.name + "' is not declared in automaton '" + a.name + "'");
      }
      return;
    }
    const LocalVar* var = a.find_local(act.name);
    if (!var) {
      error(act.pos, "'" + act.name + "' is not a local variable of automaton '" + a.name + "'");
      return;
    }
    Operand rhs = operand(act.value, lookup);
    if (rhs.kind == Operand::Kind::Unresolved) {
      if (var->type.kind == ValueType::Enum && var->type.has_literal(act.value.name)) {
        const SourcePos pos = act.value.pos;
        act.value = Expr::literal(Value::enumerator(act.value.name));
        act.value.pos = pos;
      } else {
        error(act.value.pos, "unknown identifier '" + act.value.name + "'");
      }
      return;
    }
    if (!assignable(var->type, rhs.type)) {
      error(act.pos, "type mismatch: cannot assign " + std::string(to_string(rhs.type.kind)) + " to '" + act.name + "'");
    }
  }

  static bool assignable(const TypeSpec& to, const TypeSpec& from) {
    if (to.kind == ValueType::Enum) return from.kind == ValueType::Enum && from.literals == to.literals;
    if (to.kind == ValueType::Int) return from.kind == ValueType::Int;
    return from.kind != ValueType::Enum;
  }

  Operand operand(const Expr& e, const Lookup& lookup) {
    if (e.kind == Expr::Kind::Literal) {
      if (e.value.type() == ValueType::Enum) return {Operand::Kind::Value, TypeSpec::enumeration({e.value.as_enum()})};
      return {Operand::Kind::Value, e.value.type() == ValueType::Int ? TypeSpec::integer() : TypeSpec::decimal()};
    }
    if (e.kind == Expr::Kind::Ref) {
      if (const TypeSpec* t = lookup(e.name)) return {Operand::Kind::Value, *t};
      return {Operand::Kind::Unresolved, {}};
    }
    error(e.pos, "expected a value but found a condition");
    return {Operand::Kind::Value, TypeSpec::integer()};
  }

 public:
  void resolve_bool(Expr& e, const Lookup& lookup, const Automaton* owner) {
    switch (e.kind) {
      case Expr::Kind::Bool: return;
      case Expr::Kind::Not:
      case Expr::Kind::And:
      case Expr::Kind::Or:
        for (auto& a : e.args) resolve_bool(a, lookup, owner);
        return;
      case Expr::Kind::Confirm:
      case Expr::Kind::Jump:
        if (!owner || !owner->resolve_state(e.name)) {
          error(e.pos, "unknown state '" + e.name + "' in physician response atom");
        } else {
          e.name = owner->states[*owner->resolve_state(e.name)].name;
        }
        return;
      case Expr::Kind::Literal:
      case Expr::Kind::Ref:
        error(e.pos, "expected a condition but found '" + print_expr(e) + "'");
        return;
      case Expr::Kind::Compare: resolve_compare(e, lookup); return;
    }
  }

 private:
  void resolve_compare(Expr& e, const Lookup& lookup) {
    Expr& lhs = e.args[0];
    Expr& rhs = e.args[1];
    Operand l = operand(lhs, lookup);
    Operand r = operand(rhs, lookup);
    auto bind_literal = [&](Expr& side, const TypeSpec& other) -> bool {
      if (other.kind == ValueType::Enum && other.has_literal(side.name)) {
        const SourcePos pos = side.pos;
        side = Expr::literal(Value::enumerator(side.name));
        side.pos = pos;
        return true;
      }
      error(side.pos, "unknown identifier '" + side.name + "'");
      return false;
    };
    if (l.kind == Operand::Kind::Unresolved && r.kind == Operand::Kind::Unresolved) {
      error(lhs.pos, "unknown identifier '" + lhs.name + "'");
      return;
    }
    if (l.kind == Operand::Kind::Unresolved) {
      if (!bind_literal(lhs, r.type)) return;
      l = {Operand::Kind::Value, r.type};
    } else if (r.kind == Operand::Kind::Unresolved) {
      if (!bind_literal(rhs, l.type)) return;
      r = {Operand::Kind::Value, l.type};
    }
    const bool l_enum = l.type.kind == ValueType::Enum;
    const bool r_enum = r.type.kind == ValueType::Enum;
    if (l_enum != r_enum) {
      error(e.pos, "type mismatch: cannot compare " + std::string(to_string(l.type.kind)) + " with " +
                       std::string(to_string(r.type.kind)) + " in '" + print_expr(e) + "'");
      return;
    }
    if (l_enum) {
      if (e.op != CmpOp::Eq && e.op != CmpOp::Ne) {
        error(e.pos, "type mismatch: operator " + std::string(to_string(e.op)) + " is not defined for enum values in '" +
                         print_expr(e) + "'");
        return;
      }
      // A literal operand carries a one-literal type; it must belong to the other side's enum.
      auto contains = [](const TypeSpec& big, const TypeSpec& small) {
        return std::all_of(small.literals.begin(), small.literals.end(),
                           [&](const std::string& s) { return big.has_literal(s); });
      };
      const bool l_lit = lhs.kind == Expr::Kind::Literal;
      const bool r_lit = rhs.kind == Expr::Kind::Literal;
      bool ok = true;
      if (l_lit && !r_lit) ok = contains(r.type, l.type);
      else if (r_lit && !l_lit) ok = contains(l.type, r.type);
      else if (!l_lit && !r_lit) ok = l.type.literals == r.type.literals;
      if (!ok) error(e.pos, "type mismatch: incompatible enum operands in '" + print_expr(e) + "'");
    }
  }

  void resolve_guidelines(RawPack& raw) {
    ModelPack& pack = raw.pack;
    for (std::size_t i = 0; i < pack.guidelines.rules.size(); ++i) {
      GuidelineRule& rule = pack.guidelines.rules[i];
      const auto& entries = raw.patterns[i];
      if (entries.size() != pack.automata.size()) {
        error(rule.pos, "guideline pattern has " + std::to_string(entries.size()) + " positions but the pack has " +
                            std::to_string(pack.automata.size()) + " automata");
        continue;
      }
      rule.pattern.clear();
      for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        const Automaton& a = pack.automata[k];
        if (e.automaton && *e.automaton != a.name) {
          if (!pack.find_automaton(*e.automaton)) error(e.pos, "unknown automaton '" + *e.automaton + "' in guideline pattern");
          else error(e.pos, "guideline position " + std::to_string(k + 1) + " belongs to '" + a.name + "', not '" + *e.automaton + "'");
        }
        if (!e.state) {
          rule.pattern.emplace_back(std::nullopt);
          continue;
        }
        auto idx = a.resolve_state(*e.state);
        if (!idx) {
          error(e.pos, "unknown state '" + *e.state + "' of automaton '" + a.name + "' in guideline pattern");
          rule.pattern.emplace_back(*e.state);
        } else {
          rule.pattern.emplace_back(a.states[*idx].name);
        }
      }
    }
  }

  void resolve_discretization(ModelPack& pack) {
    std::set<std::string, std::less<>> seen;
    for (auto& d : pack.discretization) {
      const Automaton* owner = pack.input_owner(d.input);
      if (!owner) {
        error(d.pos, "discretization names unknown input '" + d.input + "'");
        continue;
      }
      if (!seen.insert(d.input).second) error(d.pos, "duplicate discretization for '" + d.input + "'");
      const TypeSpec& t = owner->find_input(d.input)->type;
      for (auto& v : d.values) {
        if (!t.admits(v)) {
          error(d.pos, "type mismatch: value " + v.str() + " does not fit input '" + d.input + "'");
        } else {
          v = t.coerce(v);
        }
      }
    }
  }

  Diagnostics& diags_;
};

}  // namespace

ParseResult parse_model(std::string_view text) {
  ParseResult result;
  std::vector<Token> tokens;
  try {
    tokens = tokenize(text);
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({Severity::Error, e.pos, std::string("lexical error: ") + e.what()});
    return result;
  }
  Parser parser(TokenStream(std::move(tokens)), result.diagnostics);
  RawPack raw = parser.parse_file();
  if (has_errors(result.diagnostics)) {
    sort_diagnostics(result.diagnostics);
    return result;
  }
  Resolver(result.diagnostics).resolve(raw);
  sort_diagnostics(result.diagnostics);
  if (!has_errors(result.diagnostics)) result.pack = std::move(raw.pack);
  return result;
}

}  // namespace gsm
