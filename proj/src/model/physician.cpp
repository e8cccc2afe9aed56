#include "gsm/physician.hpp"

#include <set>
#include <utility>

namespace gsm {

std::string physician_name(std::string_view organ) { return std::string(organ) + "_Physician"; }

Automaton derive_physician_automaton(const Automaton& organ) {
  Automaton out;
  out.name = physician_name(organ.name);
  out.inputs = organ.inputs;
  out.locals = organ.locals;
  out.events = organ.events;
  out.initial = organ.initial;
  out.pos = organ.pos;
  for (const auto& s : organ.states) {
    State copy = s;
    copy.timers.clear();
    out.states.push_back(std::move(copy));
  }

  auto guard_for = [](const std::string& target) { return Expr::disj(Expr::confirm(target), Expr::jump(target)); };
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& t : organ.transitions) {
    if (t.source == t.target || !edges.emplace(t.source, t.target).second) continue;
    Transition copy;
    copy.source = t.source;
    copy.target = t.target;
    copy.guard = guard_for(t.target);
    copy.actions = t.actions;
    copy.pos = t.pos;
    out.transitions.push_back(std::move(copy));
  }
  for (const auto& s : organ.states) {
    for (const auto& t : organ.states) {
      if (s.name == t.name || !edges.emplace(s.name, t.name).second) continue;
      Transition jump;
      jump.source = s.name;
      jump.target = t.name;
      jump.guard = guard_for(t.name);
      jump.pos = organ.pos;
      out.transitions.push_back(std::move(jump));
    }
  }
  return out;
}

}  // namespace gsm
