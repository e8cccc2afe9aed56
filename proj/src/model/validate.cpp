#include "gsm/validate.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "gsm/eval.hpp"
#include "gsm/parser.hpp"

namespace gsm {

namespace {

constexpr std::size_t kOverlapBudget = 2'000'000;
constexpr std::size_t kTupleBudget = 200'000;

void collect_names(const Expr& e, std::vector<std::string>& out) {
  for (auto& n : referenced_names(e)) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
}

bool uses_command(const Expr& e) {
  if (e.kind == Expr::Kind::Confirm || e.kind == Expr::Kind::Jump) return true;
  return std::any_of(e.args.begin(), e.args.end(), uses_command);
}

/// Constants `var` is compared against; nullopt if it is compared with another variable.
std::optional<std::vector<Value>> thresholds(const Expr& e, std::string_view var, const Valuation& params) {
  std::vector<Value> out;
  bool exact = true;
  auto walk = [&](auto&& self, const Expr& x) -> void {
    if (x.kind == Expr::Kind::Compare) {
      for (int side = 0; side < 2; ++side) {
        const Expr& mine = x.args[side];
        const Expr& other = x.args[1 - side];
        if (mine.kind != Expr::Kind::Ref || mine.name != var) continue;
        if (other.kind == Expr::Kind::Literal) {
          out.push_back(other.value);
        } else if (auto it = params.find(other.name); it != params.end()) {
          out.push_back(it->second);
        } else {
          exact = false;
        }
      }
    }
    for (const auto& a : x.args) self(self, a);
  };
  walk(walk, e);
  if (!exact) return std::nullopt;
  return out;
}

std::vector<Value> candidate_domain(const TypeSpec& type, const std::vector<Value>& consts, bool exact) {
  if (type.kind == ValueType::Enum) return type.domain();
  std::vector<Value> dom = type.domain();
  if (dom.empty()) {
    // Unbounded numeric: probe just around each threshold.
    const Decimal delta = type.kind == ValueType::Int ? Decimal::from_int(1) : Decimal::from_micros(1);
    std::set<Decimal> pts{Decimal{}};
    for (const auto& c : consts) {
      if (!c.is_numeric()) continue;
      pts.insert(c.numeric());
      pts.insert(c.numeric() + delta);
      pts.insert(Decimal::from_micros(c.numeric().micros() - delta.micros()));
    }
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      if (type.kind == ValueType::Int) dom.push_back(Value::integer(it->micros() / Decimal::kScale));
      else dom.push_back(Value::decimal(*it));
    }
    return dom;
  }
  std::reverse(dom.begin(), dom.end());
  if (!exact) return dom;
  // Guards only see which side of each threshold a value falls on, so keep
  // the largest value of each run of equally-classified values.
  auto signature = [&](const Value& v) {
    std::vector<int> sig;
    for (const auto& c : consts) {
      const auto o = compare_values(v, c);
      sig.push_back(o < 0 ? -1 : (o > 0 ? 1 : 0));
    }
    return sig;
  };
  std::vector<Value> reduced;
  std::vector<int> last;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto sig = signature(dom[i]);
    if (i == 0 || sig != last) reduced.push_back(dom[i]);
    last = std::move(sig);
  }
  return reduced;
}

std::string format_valuation(const Valuation& v, const std::vector<std::string>& order) {
  std::string out;
  for (const auto& n : order) {
    auto it = v.find(n);
    if (it == v.end()) continue;
    if (!out.empty()) out += ", ";
    out += n + "=" + it->second.str();
  }
  return out;
}

std::string transition_label(const Transition& t) { return t.source + " -> " + t.target; }

}  // namespace

std::optional<Valuation> overlap_witness(const ModelPack& pack, const Automaton& automaton, const Expr& a,
                                         const Expr& b) {
  const Valuation params = pack.param_values();
  std::vector<std::string> names;
  collect_names(a, names);
  collect_names(b, names);
  std::vector<std::string> vars;
  std::vector<std::vector<Value>> domains;
  for (const auto& n : names) {
    const TypeSpec* type = nullptr;
    if (const LocalVar* l = automaton.find_local(n)) type = &l->type;
    else if (const InputDecl* in = automaton.find_input(n)) type = &in->type;
    else if (params.count(n)) continue;
    else if (const Automaton* owner = pack.input_owner(n)) type = &owner->find_input(n)->type;
    if (!type) return std::nullopt;
    auto ta = thresholds(a, n, params);
    auto tb = thresholds(b, n, params);
    std::vector<Value> consts;
    if (ta && tb) {
      consts = *ta;
      consts.insert(consts.end(), tb->begin(), tb->end());
    }
    vars.push_back(n);
    domains.push_back(candidate_domain(*type, consts, ta && tb));
    if (domains.back().empty()) return std::nullopt;
  }
  std::vector<std::optional<PhysicianCommand>> commands{std::nullopt};
  if (uses_command(a) || uses_command(b)) {
    for (const auto& s : automaton.states) {
      commands.push_back(PhysicianCommand{PhysicianCommand::Kind::Confirm, s.name});
      commands.push_back(PhysicianCommand{PhysicianCommand::Kind::Jump, s.name});
    }
  }
  std::size_t total = commands.size();
  for (const auto& d : domains) {
    total *= d.size();
    if (total > kOverlapBudget) throw std::length_error("domain too large");
  }
  std::vector<std::size_t> idx(vars.size(), 0);
  Valuation inputs;
  for (std::size_t step = 0; step < total; ++step) {
    std::size_t rest = step;
    const std::size_t cmd = rest % commands.size();
    rest /= commands.size();
    // Odometer with the first variable most significant.
    for (std::size_t k = vars.size(); k-- > 0;) {
      idx[k] = rest % domains[k].size();
      rest /= domains[k].size();
    }
    for (std::size_t k = 0; k < vars.size(); ++k) inputs.insert_or_assign(vars[k], domains[k][idx[k]]);
    const PhysicianCommand* pc = commands[cmd] ? &*commands[cmd] : nullptr;
    EvalScope scope{&inputs, &params, nullptr, pc};
    if (eval_guard(a, scope) && eval_guard(b, scope)) {
      if (pc) {
        inputs.insert_or_assign(
            "command", Value::enumerator((pc->kind == PhysicianCommand::Kind::Confirm ? "confirm(" : "jump(") +
                                         pc->state + ")"));
      }
      return inputs;
    }
  }
  return std::nullopt;
}

Diagnostics validate(const ModelPack& pack) {
  Diagnostics out;
  auto report = [&](Severity s, SourcePos pos, std::string msg) { out.push_back({s, pos, std::move(msg)}); };

  if (pack.automata.empty()) report(Severity::Error, {}, "pack declares no automaton");
  std::set<std::string, std::less<>> auto_names;
  const Valuation params = pack.param_values();

  std::vector<std::string> read;
  for (const auto& r : pack.rules) collect_names(r.condition, read);

  for (const auto& a : pack.automata) {
    if (!auto_names.insert(a.name).second) report(Severity::Error, a.pos, "duplicate automaton '" + a.name + "'");
    std::set<std::string, std::less<>> states;
    for (const auto& s : a.states) {
      if (!states.insert(s.name).second) report(Severity::Error, s.pos, "duplicate state '" + s.name + "' in '" + a.name + "'");
      for (const auto& t : s.timers) {
        if (t.duration <= 0) report(Severity::Error, t.pos, "timer duration must be positive in state '" + s.name + "'");
      }
    }
    const auto init = a.state_index(a.initial);
    if (!init) report(Severity::Error, a.pos, "missing initial state in automaton '" + a.name + "'");

    auto check_name = [&](const std::string& n, SourcePos pos) {
      if (!a.find_local(n) && !a.find_input(n) && !params.count(n)) {
        report(Severity::Error, pos, "unknown identifier '" + n + "' in automaton '" + a.name + "'");
      }
    };
    auto check_actions = [&](const std::vector<Action>& acts) {
      for (const auto& act : acts) {
        if (act.kind == Action::Kind::Emit) {
          if (!a.declares_event(act.name)) report(Severity::Error, act.pos, "event '" + act.name + "' is not declared in '" + a.name + "'");
        } else {
          if (!a.find_local(act.name)) report(Severity::Error, act.pos, "'" + act.name + "' is not a local variable of '" + a.name + "'");
          for (const auto& n : referenced_names(act.value)) check_name(n, act.pos);
          collect_names(act.value, read);
        }
      }
    };
    for (const auto& s : a.states) {
      check_actions(s.entry);
      check_actions(s.exit);
      for (const auto& t : s.timers) check_actions(t.actions);
    }
    for (const auto& t : a.transitions) {
      if (!a.state_index(t.source)) report(Severity::Error, t.pos, "unknown source state '" + t.source + "' in '" + a.name + "'");
      if (!a.state_index(t.target)) report(Severity::Error, t.pos, "unknown target state '" + t.target + "' in '" + a.name + "'");
      for (const auto& n : referenced_names(t.guard)) check_name(n, t.pos);
      collect_names(t.guard, read);
      check_actions(t.actions);
    }
    if (!init) continue;
    const State& initial = a.states[*init];

    for (const auto& s : a.states) {
      if (s.name == a.initial) continue;
      const bool edge = std::any_of(a.transitions.begin(), a.transitions.end(), [&](const Transition& t) {
        return t.source == a.initial && t.target == s.name;
      });
      if (!edge) {
        report(Severity::Warning, initial.pos,
               "initial state '" + a.initial + "' of '" + a.name + "' has no transition to '" + s.name + "'");
      }
    }

    std::vector<bool> seen(a.states.size(), false);
    std::deque<std::size_t> queue{*init};
    seen[*init] = true;
    while (!queue.empty()) {
      const std::string& from = a.states[queue.front()].name;
      queue.pop_front();
      for (const auto& t : a.transitions) {
        if (t.source != from || (t.guard.kind == Expr::Kind::Bool && !t.guard.flag)) continue;
        if (auto k = a.state_index(t.target); k && !seen[*k]) {
          seen[*k] = true;
          queue.push_back(*k);
        }
      }
    }
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      if (!seen[k]) report(Severity::Warning, a.states[k].pos, "state '" + a.states[k].name + "' of '" + a.name + "' is unreachable");
    }

    if (!initial.entry.empty()) {
      report(Severity::Warning, initial.pos,
             "entry actions of initial state '" + a.initial + "' run only when it is re-entered");
    }

    for (std::size_t i = 0; i < a.transitions.size(); ++i) {
      for (std::size_t j = i + 1; j < a.transitions.size(); ++j) {
        const Transition& t1 = a.transitions[i];
        const Transition& t2 = a.transitions[j];
        if (t1.source != t2.source) continue;
        try {
          if (auto w = overlap_witness(pack, a, t1.guard, t2.guard)) {
            std::vector<std::string> order;
            collect_names(t1.guard, order);
            collect_names(t2.guard, order);
            order.push_back("command");
            std::string witness = format_valuation(*w, order);
            report(Severity::Warning, t2.pos,
                   "guards of '" + transition_label(t1) + "' and '" + transition_label(t2) + "' in '" + a.name +
                       "' overlap" + (witness.empty() ? std::string() : " (witness: " + witness + ")") +
                       "; the first declared wins");
          }
        } catch (const std::length_error&) {
          report(Severity::Info, t2.pos,
                 "overlap of '" + transition_label(t1) + "' and '" + transition_label(t2) + "' not checked: domain too large");
        } catch (const EvalError&) {
        }
      }
    }
  }

  for (const auto& a : pack.automata) {
    for (const auto& in : a.inputs) {
      if (std::find(read.begin(), read.end(), in.name) == read.end()) {
        report(Severity::Info, in.pos, "input '" + in.name + "' of '" + a.name + "' is never read");
      }
    }
  }

  if (!pack.guidelines.rules.empty() && !pack.automata.empty()) {
    std::size_t total = 1;
    for (const auto& a : pack.automata) total *= std::max<std::size_t>(a.states.size(), 1);
    if (total <= kTupleBudget) {
      std::vector<std::size_t> idx(pack.automata.size(), 0);
      std::size_t missing = 0;
      std::string first;
      for (std::size_t n = 0; n < total; ++n) {
        std::size_t rest = n;
        for (std::size_t k = pack.automata.size(); k-- > 0;) {
          const std::size_t size = std::max<std::size_t>(pack.automata[k].states.size(), 1);
          idx[k] = rest % size;
          rest /= size;
        }
        const bool covered = std::any_of(pack.guidelines.rules.begin(), pack.guidelines.rules.end(), [&](const GuidelineRule& r) {
          if (r.pattern.size() != pack.automata.size()) return false;
          for (std::size_t k = 0; k < r.pattern.size(); ++k) {
            if (r.pattern[k] && (pack.automata[k].states.empty() || *r.pattern[k] != pack.automata[k].states[idx[k]].name)) return false;
          }
          return true;
        });
        if (covered) continue;
        if (missing++ == 0) {
          first = "(";
          for (std::size_t k = 0; k < idx.size(); ++k) {
            if (k) first += ", ";
            first += pack.automata[k].states.empty() ? "?" : pack.automata[k].states[idx[k]].name;
          }
          first += ")";
        }
      }
      if (missing) {
        report(Severity::Warning, pack.guidelines.rules.front().pos,
               "guideline table has no row for " + std::to_string(missing) + " of " + std::to_string(total) +
                   " state tuples, e.g. " + first);
      }
    }
  }

  sort_diagnostics(out);
  return out;
}

}  // namespace gsm
