#include "gsm/lower.hpp"

#include <map>

namespace gsm {

namespace {

bool name_taken(std::string_view n, const Automaton& a, const ModelPack& pack) {
  if (a.find_local(n) || a.find_input(n) || pack.find_param(n) || pack.input_owner(n)) return true;
  return false;
}

}  // namespace

Automaton lower_automaton(const Automaton& source, const ModelPack& pack) {
  Automaton out = source;
  // State name -> clocks restarted on entry.
  std::map<std::string, std::vector<std::string>, std::less<>> clocks;
  std::vector<Transition> timer_edges;

  for (const auto& s : source.states) {
    for (const auto& timer : s.timers) {
      std::string name = "timer_" + s.name;
      for (int k = 2; name_taken(name, out, pack); ++k) name = "timer_" + s.name + "_" + std::to_string(k);
      LocalVar clock;
      clock.name = name;
      clock.type = TypeSpec::integer();
      clock.initial = Value::integer(0);
      clock.clock = true;
      clock.pos = timer.pos;
      out.locals.push_back(clock);
      clocks[s.name].push_back(name);

      Transition t;
      t.source = s.name;
      t.target = s.name;
      t.guard = Expr::compare(CmpOp::Ge, Expr::ref(name), Expr::literal(Value::integer(timer.duration)));
      t.actions = timer.actions;
      t.actions.push_back(Action::set(name, Expr::literal(Value::integer(0))));
      t.internal = true;
      t.pos = timer.pos;
      timer_edges.push_back(std::move(t));
    }
  }

  for (auto& t : out.transitions) {
    if (t.internal) continue;
    const auto src = source.state_index(t.source);
    const auto tgt = source.state_index(t.target);
    if (!src || !tgt) continue;
    std::vector<Action> actions = source.states[*src].exit;
    actions.insert(actions.end(), t.actions.begin(), t.actions.end());
    const State& target = source.states[*tgt];
    actions.insert(actions.end(), target.entry.begin(), target.entry.end());
    if (auto it = clocks.find(target.name); it != clocks.end()) {
      for (const auto& c : it->second) actions.push_back(Action::set(c, Expr::literal(Value::integer(0))));
    }
    t.actions = std::move(actions);
  }
  out.transitions.insert(out.transitions.end(), timer_edges.begin(), timer_edges.end());
  for (auto& s : out.states) {
    s.entry.clear();
    s.exit.clear();
    s.timers.clear();
  }
  return out;
}

ModelPack lower_actions(const ModelPack& pack) {
  ModelPack out = pack;
  for (std::size_t i = 0; i < pack.automata.size(); ++i) out.automata[i] = lower_automaton(pack.automata[i], pack);
  return out;
}

}  // namespace gsm
