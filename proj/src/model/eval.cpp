#include "gsm/eval.hpp"

namespace gsm {

const Value* EvalScope::find(std::string_view name) const {
  for (const Valuation* v : {locals, inputs, params}) {
    if (!v) continue;
    if (auto it = v->find(name); it != v->end()) return &it->second;
  }
  return nullptr;
}

Value eval_value(const Expr& e, const EvalScope& scope) {
  if (e.kind == Expr::Kind::Literal) return e.value;
  if (e.kind == Expr::Kind::Ref) {
    if (const Value* v = scope.find(e.name)) return *v;
    throw EvalError("no value for '" + e.name + "'");
  }
  throw EvalError("expression is not a value");
}

namespace {

bool compare(CmpOp op, const Value& a, const Value& b) {
  const auto ord = compare_values(a, b);
  switch (op) {
    case CmpOp::Eq: return ord == 0;
    case CmpOp::Ne: return ord != 0;
    case CmpOp::Lt: return ord < 0;
    case CmpOp::Le: return ord <= 0;
    case CmpOp::Gt: return ord > 0;
    case CmpOp::Ge: return ord >= 0;
  }
  return false;
}

const Value& operand(const Expr& e, const EvalScope& scope) {
  if (e.kind == Expr::Kind::Literal) return e.value;
  if (e.kind == Expr::Kind::Ref) {
    if (const Value* v = scope.find(e.name)) return *v;
    throw EvalError("no value for '" + e.name + "'");
  }
  throw EvalError("expression is not a value");
}

}  // namespace

bool eval_guard(const Expr& g, const EvalScope& scope) {
  switch (g.kind) {
    case Expr::Kind::Bool: return g.flag;
    case Expr::Kind::Not: return !eval_guard(g.args[0], scope);
    case Expr::Kind::And: return eval_guard(g.args[0], scope) && eval_guard(g.args[1], scope);
    case Expr::Kind::Or: return eval_guard(g.args[0], scope) || eval_guard(g.args[1], scope);
    case Expr::Kind::Compare: return compare(g.op, operand(g.args[0], scope), operand(g.args[1], scope));
    case Expr::Kind::Confirm:
      return scope.command && scope.command->kind == PhysicianCommand::Kind::Confirm && scope.command->state == g.name;
    case Expr::Kind::Jump:
      return scope.command && scope.command->kind == PhysicianCommand::Kind::Jump && scope.command->state == g.name;
    case Expr::Kind::Literal:
    case Expr::Kind::Ref: throw EvalError("value used as a condition");
  }
  return false;
}

bool eval_guard(const Expr& guard, const Valuation& snapshot, const Valuation& params) {
  return eval_guard(guard, EvalScope{&snapshot, &params, nullptr, nullptr});
}

void run_actions(const std::vector<Action>& actions, const Automaton& automaton, const EvalScope& scope,
                 Valuation& locals, std::vector<EmittedEvent>& out) {
  for (const auto& a : actions) {
    if (a.kind == Action::Kind::Emit) {
      out.push_back({a.name, a.payload});
      continue;
    }
    Value v = eval_value(a.value, scope);
    if (const LocalVar* decl = automaton.find_local(a.name)) v = decl->type.coerce(v);
    locals.insert_or_assign(a.name, std::move(v));
  }
}

}  // namespace gsm
