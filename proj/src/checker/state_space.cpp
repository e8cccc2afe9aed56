#include "gsm/checker/state_space.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <set>

namespace gsm::checker {

std::string EdgeLabel::str() const {
  switch (kind) {
    case Kind::Snapshot: return "snapshot " + name + "=" + value.str();
    case Kind::Resample: return "resample";
    case Kind::Confirm: return "confirm " + name + " " + state;
    case Kind::Jump: return "jump " + name + " " + state;
    case Kind::Tick: return "tick " + name + " " + std::to_string(delta);
    case Kind::Stutter: return "stutter";
  }
  return "?";
}

std::size_t Component::slot(std::size_t p) const {
  return static_cast<std::size_t>(std::find(processes.begin(), processes.end(), p) - processes.begin());
}

Valuation Component::input_values(const ComponentNode& n) const {
  Valuation v;
  for (std::size_t k = 0; k < inputs.size(); ++k) v.emplace(inputs[k], domains[k][n.inputs[k]]);
  return v;
}

std::size_t StateSpace::total_nodes() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.nodes.size();
  return n;
}

std::size_t StateSpace::total_edges() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.edge_count;
  return n;
}

double StateSpace::product_bound() const {
  double p = 1;
  for (const auto& c : components) p *= static_cast<double>(c.nodes.size());
  return p;
}

std::vector<Value> checker_domain(const ModelPack& pack, std::string_view input, bool full_domains) {
  const Automaton* owner = pack.input_owner(input);
  if (!owner) throw PreconditionError("unknown input '" + std::string(input) + "'");
  if (!full_domains) {
    for (const auto& d : pack.discretization) {
      if (d.input == input) return d.values;
    }
  }
  auto dom = owner->find_input(input)->type.domain();
  if (dom.empty()) {
    throw PreconditionError("input '" + std::string(input) + "' of '" + owner->name +
                            "' has no finite domain; declare `range lo..hi step s` or a discretization");
  }
  return dom;
}

namespace {

void collect_refs(const Expr& e, std::set<std::string>& out) {
  for (auto& n : referenced_names(e)) out.insert(std::move(n));
}

std::set<std::string> names_read(const Automaton& a) {
  std::set<std::string> out;
  for (const auto& t : a.transitions) {
    collect_refs(t.guard, out);
    for (const auto& act : t.actions) {
      if (act.kind == Action::Kind::Set) collect_refs(act.value, out);
    }
  }
  return out;
}

/// Breakpoints of one clock: every constant k it is compared with, and k+1.
struct ClockInfo {
  std::string name;
  std::vector<std::int64_t> points;  // ascending
  std::int64_t cap = 0;
};

std::vector<ClockInfo> clock_info(const Automaton& a, const Valuation& params) {
  std::vector<ClockInfo> out;
  for (const auto& l : a.locals) {
    if (!l.clock) continue;
    std::set<std::int64_t> pts;
    auto walk = [&](auto&& self, const Expr& e) -> void {
      if (e.kind == Expr::Kind::Compare) {
        for (int side = 0; side < 2; ++side) {
          const Expr& mine = e.args[side];
          const Expr& other = e.args[1 - side];
          if (mine.kind != Expr::Kind::Ref || mine.name != l.name) continue;
          std::optional<Value> c;
          if (other.kind == Expr::Kind::Literal) c = other.value;
          else if (auto it = params.find(other.name); other.kind == Expr::Kind::Ref && it != params.end()) c = it->second;
          if (!c || !c->is_numeric()) {
            throw PreconditionError("clock '" + l.name + "' of '" + a.name + "' is compared with a non-constant");
          }
          const std::int64_t micros = c->numeric().micros();
          const std::int64_t k = micros >= 0 ? micros / Decimal::kScale : -((-micros + Decimal::kScale - 1) / Decimal::kScale);
          pts.insert(k);
          pts.insert(k + 1);
        }
      }
      for (const auto& x : e.args) self(self, x);
    };
    for (const auto& t : a.transitions) {
      walk(walk, t.guard);
      for (const auto& act : t.actions) {
        if (act.kind == Action::Kind::Set) {
          for (const auto& n : referenced_names(act.value)) {
            if (n == l.name) throw PreconditionError("clock '" + l.name + "' of '" + a.name + "' is read by an action");
          }
        }
      }
    }
    ClockInfo info;
    info.name = l.name;
    for (auto p : pts) {
      if (p > 0) info.points.push_back(p);
    }
    info.cap = info.points.empty() ? 0 : info.points.back();
    out.push_back(std::move(info));
  }
  return out;
}

void encode_value(std::string& out, const Value& v) {
  if (v.type() == ValueType::Enum) {
    out += 'e';
    out += v.as_enum();
    out += '\0';
  } else {
    out += v.type() == ValueType::Int ? 'i' : 'd';
    const std::int64_t m = v.type() == ValueType::Int ? v.as_int() : v.as_decimal().micros();
    out.append(reinterpret_cast<const char*>(&m), sizeof m);
  }
}

void encode_instance(std::string& out, const InstanceState& s) {
  const auto loc = static_cast<std::uint32_t>(s.location);
  out.append(reinterpret_cast<const char*>(&loc), sizeof loc);
  for (const auto& [k, v] : s.locals) encode_value(out, v);
}

std::string encode(const ComponentNode& n) {
  std::string out;
  out += n.started ? 'S' : 's';
  for (auto i : n.inputs) out.append(reinterpret_cast<const char*>(&i), sizeof i);
  for (const auto& o : n.organs) encode_instance(out, o);
  for (const auto& p : n.physicians) encode_instance(out, p);
  for (const auto& p : n.protocols) {
    out += static_cast<char>(p.phase);
    out += static_cast<char>(p.counter);
    out.append(reinterpret_cast<const char*>(&p.remaining), sizeof p.remaining);
    out += p.prev_s;
    out += '\0';
    out += p.prev_b;
    out += '\0';
  }
  return out;
}

class Builder {
 public:
  Builder(StateSpace& space, Component& comp, std::size_t& budget) : space_(space), comp_(comp), budget_(budget) {
    const CompiledPack& pack = *space.pack;
    for (std::size_t p : comp.processes) {
      organ_clocks_.push_back(clock_info(pack.organs[p], pack.params));
      physician_clocks_.push_back(clock_info(pack.physicians[p], pack.params));
      protocols_.emplace_back(pack.source.automata[p].name, pack.source.protocol);
    }
  }

  void run() {
    ComponentNode init;
    init.inputs.assign(comp_.inputs.size(), 0);
    for (std::size_t p : comp_.processes) {
      init.organs.push_back(space_.organ_machines[p].initial());
      init.physicians.push_back(space_.physician_machines[p].initial());
      ProtocolSnapshot ps;
      ps.announced = true;
      init.protocols.push_back(ps);
    }
    intern(std::move(init));
    for (std::size_t i = 0; i < comp_.nodes.size(); ++i) expand(static_cast<std::uint32_t>(i));
    comp_.stable = true;
    for (std::size_t i = 0; i < comp_.nodes.size(); ++i) {
      if (comp_.nodes[i].started && comp_.resample[i] != i) comp_.stable = false;
    }
  }

 private:
  std::uint32_t intern(ComponentNode n) {
    std::string key = encode(n);
    auto [it, inserted] = index_.emplace(std::move(key), static_cast<std::uint32_t>(comp_.nodes.size()));
    if (inserted) {
      if (budget_ == 0) {
        throw ResourceError("state space exceeds the node cap of " + std::to_string(space_.options.node_cap) +
                            " nodes; raise --node-cap or coarsen the discretization");
      }
      --budget_;
      comp_.nodes.push_back(std::move(n));
      comp_.edges.emplace_back();
      comp_.resample.push_back(it->second);
    }
    return it->second;
  }

  std::uint32_t label(EdgeLabel l) {
    std::string key = std::to_string(static_cast<int>(l.kind)) + '|' + l.str();
    auto [it, inserted] = label_index_.emplace(std::move(key), static_cast<std::uint32_t>(comp_.labels.size()));
    if (inserted) comp_.labels.push_back(std::move(l));
    return it->second;
  }

  void add_edge(std::uint32_t from, ComponentNode to, EdgeLabel l) {
    const std::uint32_t lab = label(std::move(l));
    const std::uint32_t target = intern(std::move(to));
    comp_.edges[from].push_back({target, lab});
    ++comp_.edge_count;
  }

  void cap_clocks(ComponentNode& n) const {
    for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
      for (const auto& c : organ_clocks_[j]) cap(n.organs[j], c);
      for (const auto& c : physician_clocks_[j]) cap(n.physicians[j], c);
    }
  }

  static void cap(InstanceState& s, const ClockInfo& c) {
    auto& v = s.locals[c.name];
    if (v.as_int() > c.cap) v = Value::integer(c.cap);
  }

  void evaluate(ComponentNode& n) {
    if (space_.options.organs_only) return;
    for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
      const std::size_t p = comp_.processes[j];
      DivergenceProtocol& proto = protocols_[j];
      proto.restore(n.protocols[j]);
      proto.evaluate(space_.organ_machines[p].state_name(n.organs[j].location),
                     space_.physician_machines[p].state_name(n.physicians[j].location), 0);
      n.protocols[j] = normalize(proto.snapshot());
    }
  }

  ProtocolSnapshot normalize(ProtocolSnapshot s) const {
    s.counter = std::min(s.counter, space_.options.counter_cap);
    s.announced = true;
    if (s.phase == Phase::Converged) {
      s.prev_s.clear();
      s.prev_b.clear();
    }
    return s;
  }

  ComponentNode ingest(const ComponentNode& from, std::size_t input, std::uint16_t value) {
    ComponentNode n = from;
    n.started = true;
    if (input < n.inputs.size()) n.inputs[input] = value;
    const Valuation inputs = comp_.input_values(n);
    for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
      const std::size_t p = comp_.processes[j];
      space_.organ_machines[p].step(n.organs[j], EvalScope{&inputs, &space_.pack->params, nullptr, nullptr});
    }
    cap_clocks(n);
    evaluate(n);
    return n;
  }

  void expand(std::uint32_t id) {
    const ComponentNode node = comp_.nodes[id];
    for (std::size_t k = 0; k < comp_.inputs.size(); ++k) {
      for (std::uint16_t v = 0; v < comp_.domains[k].size(); ++v) {
        if (v == node.inputs[k]) continue;
        EdgeLabel l;
        l.kind = EdgeLabel::Kind::Snapshot;
        l.name = comp_.inputs[k];
        l.value = comp_.domains[k][v];
        add_edge(id, ingest(node, k, v), std::move(l));
      }
    }
    {
      ComponentNode same = ingest(node, comp_.inputs.size(), 0);
      if (encode(same) != encode(node)) {
        add_edge(id, std::move(same), EdgeLabel{});
        comp_.resample[id] = comp_.edges[id].back().target;
      }
    }
    if (!node.started) return;

    const Valuation inputs = comp_.input_values(node);
    if (!space_.options.organs_only) {
      for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
        const std::size_t p = comp_.processes[j];
        const Machine& pm = space_.physician_machines[p];
        const std::string& organ_name = space_.pack->source.automata[p].name;
        const std::string s = space_.organ_machines[p].state_name(node.organs[j].location);
        const std::size_t b = node.physicians[j].location;
        auto respond = [&](PhysicianCommand::Kind kind, const std::string& target) {
          ComponentNode n = node;
          const PhysicianCommand cmd{kind, target};
          if (!pm.step(n.physicians[j], EvalScope{&inputs, &space_.pack->params, nullptr, &cmd})) return;
          cap_clocks(n);
          evaluate(n);
          EdgeLabel l;
          l.kind = kind == PhysicianCommand::Kind::Confirm ? EdgeLabel::Kind::Confirm : EdgeLabel::Kind::Jump;
          l.name = organ_name;
          l.state = target;
          add_edge(id, std::move(n), std::move(l));
        };
        if (s != pm.state_name(b)) respond(PhysicianCommand::Kind::Confirm, s);
        for (std::size_t t = 0; t < pm.automaton().states.size(); ++t) {
          if (t != b) respond(PhysicianCommand::Kind::Jump, pm.state_name(t));
        }
      }
    }

    std::optional<Millis> delta;
    auto consider = [&](Millis d) {
      if (d > 0 && (!delta || d < *delta)) delta = d;
    };
    for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
      if (!space_.options.organs_only) {
        const ProtocolSnapshot& ps = node.protocols[j];
        if (ps.phase == Phase::Diverged1 || ps.phase == Phase::Diverged2) consider(ps.remaining);
      }
      auto clocks = [&](const std::vector<ClockInfo>& infos, const InstanceState& inst) {
        for (const auto& c : infos) {
          const std::int64_t v = inst.locals.at(c.name).as_int();
          for (auto p : c.points) {
            if (p > v) {
              consider(p - v);
              break;
            }
          }
        }
      };
      clocks(organ_clocks_[j], node.organs[j]);
      clocks(physician_clocks_[j], node.physicians[j]);
    }
    if (delta) {
      ComponentNode n = node;
      for (std::size_t j = 0; j < comp_.processes.size(); ++j) {
        const std::size_t p = comp_.processes[j];
        space_.organ_machines[p].advance_clocks(n.organs[j], *delta);
        space_.physician_machines[p].advance_clocks(n.physicians[j], *delta);
        if (!space_.options.organs_only) {
          DivergenceProtocol& proto = protocols_[j];
          proto.restore(n.protocols[j]);
          proto.tick(*delta);
          n.protocols[j] = normalize(proto.snapshot());
        }
      }
      cap_clocks(n);
      EdgeLabel l;
      l.kind = EdgeLabel::Kind::Tick;
      l.name = space_.pack->source.automata[comp_.processes.front()].name;
      l.delta = *delta;
      add_edge(id, std::move(n), std::move(l));
    }
  }

  StateSpace& space_;
  Component& comp_;
  std::size_t& budget_;
  std::vector<std::vector<ClockInfo>> organ_clocks_;
  std::vector<std::vector<ClockInfo>> physician_clocks_;
  std::vector<DivergenceProtocol> protocols_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::map<std::string, std::uint32_t> label_index_;
};

}  // namespace

StateSpace build_state_space(std::shared_ptr<const CompiledPack> pack, const SpaceOptions& options) {
  StateSpace space;
  space.pack = pack;
  space.options = options;
  const std::size_t n = pack->size();
  for (std::size_t i = 0; i < n; ++i) {
    space.organ_machines.emplace_back(pack->organs[i]);
    space.physician_machines.emplace_back(pack->physicians[i]);
  }

  // Union processes that read a common input.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::set<std::string>> reads(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& in : pack->source.automata[i].inputs) reads[i].insert(in.name);
    for (const auto& name : names_read(pack->organs[i])) {
      if (pack->source.input_owner(name)) reads[i].insert(name);
    }
    for (const auto& name : names_read(pack->physicians[i])) {
      if (pack->source.input_owner(name)) reads[i].insert(name);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool shared = std::any_of(reads[i].begin(), reads[i].end(), [&](const std::string& x) { return reads[j].count(x) > 0; });
      if (shared) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::size_t> comp_index;
  space.component_of.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    auto [it, inserted] = comp_index.emplace(root, space.components.size());
    if (inserted) space.components.emplace_back();
    space.components[it->second].processes.push_back(i);
    space.component_of[i] = it->second;
  }
  for (auto& c : space.components) {
    for (std::size_t p : c.processes) {
      for (const auto& in : pack->source.automata[p].inputs) {
        c.inputs.push_back(in.name);
        auto dom = checker_domain(pack->source, in.name, options.full_domains);
        if (dom.size() > 65535) throw PreconditionError("domain of '" + in.name + "' is too large");
        c.domains.push_back(std::move(dom));
      }
    }
  }

  std::size_t budget = options.node_cap;
  for (auto& c : space.components) Builder(space, c, budget).run();
  return space;
}

}  // namespace gsm::checker
