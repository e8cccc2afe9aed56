#include "gsm/checker/check.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

namespace gsm::checker {

std::vector<std::string> Trace::labels() const {
  std::vector<std::string> out;
  for (const auto& s : steps) out.push_back(s.str());
  return out;
}

namespace {

constexpr std::size_t kDnfLimit = 256;
constexpr std::uint32_t kNone = static_cast<std::uint32_t>(-1);

struct Graph {
  const std::vector<std::vector<Edge>>* edges;
  const std::vector<EdgeLabel>* labels;
  bool stutter = false;

  std::size_t size() const { return edges->size(); }
  const std::vector<Edge>& out(std::uint32_t n) const { return (*edges)[n]; }
  bool deadlocked(std::uint32_t n) const { return !stutter && (*edges)[n].empty(); }
};

EdgeLabel stutter_label() {
  EdgeLabel l;
  l.kind = EdgeLabel::Kind::Stutter;
  return l;
}

/// Shortest path from node 0 to a node with sat[n]; nullopt if none.
std::optional<Trace> find_path(const Graph& g, const std::vector<char>& sat) {
  std::vector<std::uint32_t> parent(g.size(), kNone);
  std::vector<std::uint32_t> via(g.size(), kNone);
  std::vector<char> seen(g.size(), 0);
  std::deque<std::uint32_t> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    const std::uint32_t n = queue.front();
    queue.pop_front();
    if (sat[n]) {
      Trace t;
      for (std::uint32_t x = n; x != 0; x = parent[x]) t.steps.push_back((*g.labels)[via[x]]);
      std::reverse(t.steps.begin(), t.steps.end());
      return t;
    }
    for (const Edge& e : g.out(n)) {
      if (seen[e.target]) continue;
      seen[e.target] = 1;
      parent[e.target] = n;
      via[e.target] = e.label;
      queue.push_back(e.target);
    }
  }
  return std::nullopt;
}

/// A path from node 0 that stays inside `region` forever: either it ends in a
/// deadlock or it reaches a cycle. Requires region[0].
std::optional<Trace> find_lasso(const Graph& g, const std::vector<char>& region) {
  if (!region[0]) return std::nullopt;
  if (g.stutter) {
    Trace t;
    t.steps.push_back(stutter_label());
    t.loop_start = 0;
    return t;
  }
  const std::size_t n = g.size();
  std::vector<std::uint32_t> parent(n, kNone), via(n, kNone), order;
  std::vector<char> seen(n, 0);
  std::deque<std::uint32_t> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    const std::uint32_t x = queue.front();
    queue.pop_front();
    order.push_back(x);
    for (const Edge& e : g.out(x)) {
      if (!region[e.target] || seen[e.target]) continue;
      seen[e.target] = 1;
      parent[e.target] = x;
      via[e.target] = e.label;
      queue.push_back(e.target);
    }
  }
  auto path_to = [&](std::uint32_t x) {
    Trace t;
    for (std::uint32_t y = x; y != 0; y = parent[y]) t.steps.push_back((*g.labels)[via[y]]);
    std::reverse(t.steps.begin(), t.steps.end());
    return t;
  };

  // Tarjan over the explored region, iteratively.
  std::vector<std::uint32_t> index(n, kNone), low(n, 0), comp(n, kNone);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::size_t> comp_size;
  std::uint32_t counter = 0;
  for (std::uint32_t root : order) {
    if (index[root] != kNone) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      const auto& outs = g.out(v);
      if (i < outs.size()) {
        const std::uint32_t w = outs[i++].target;
        if (!seen[w]) continue;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        const auto id = static_cast<std::uint32_t>(comp_size.size());
        std::size_t size = 0;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = id;
          ++size;
        } while (w != v);
        comp_size.push_back(size);
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  auto cyclic = [&](std::uint32_t v) {
    if (comp_size[comp[v]] > 1) return true;
    for (const Edge& e : g.out(v)) {
      if (e.target == v) return true;
    }
    return false;
  };

  for (std::uint32_t x : order) {
    if (g.out(x).empty()) return path_to(x);
    if (!cyclic(x)) continue;
    Trace t = path_to(x);
    t.loop_start = t.steps.size();
    // Shortest cycle back to x inside its SCC.
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> back;
    std::deque<std::uint32_t> q{x};
    std::vector<std::uint32_t> visited{x};
    std::optional<std::pair<std::uint32_t, std::uint32_t>> closing;
    while (!q.empty() && !closing) {
      const std::uint32_t y = q.front();
      q.pop_front();
      for (const Edge& e : g.out(y)) {
        if (!seen[e.target] || comp[e.target] != comp[x]) continue;
        if (e.target == x) {
          closing = {y, e.label};
          break;
        }
        if (back.count(e.target)) continue;
        back[e.target] = {y, e.label};
        q.push_back(e.target);
      }
    }
    std::vector<EdgeLabel> loop{(*g.labels)[closing->second]};
    for (std::uint32_t y = closing->first; y != x; y = back[y].first) loop.push_back((*g.labels)[back[y].second]);
    std::reverse(loop.begin(), loop.end());
    t.steps.insert(t.steps.end(), loop.begin(), loop.end());
    return t;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Property evaluation

class Evaluator {
 public:
  explicit Evaluator(const StateSpace& space) : space_(space) {}

  using NodeOf = std::function<std::uint32_t(std::size_t component)>;

  bool eval(const PropExpr& e, const NodeOf& node_of, bool deadlocked) const {
    switch (e.kind) {
      case PropExpr::Kind::True: return true;
      case PropExpr::Kind::False: return false;
      case PropExpr::Kind::Deadlock: return deadlocked;
      case PropExpr::Kind::Not: return !eval(e.args[0], node_of, deadlocked);
      case PropExpr::Kind::And: return eval(e.args[0], node_of, deadlocked) && eval(e.args[1], node_of, deadlocked);
      case PropExpr::Kind::Or: return eval(e.args[0], node_of, deadlocked) || eval(e.args[1], node_of, deadlocked);
      case PropExpr::Kind::Imply: return !eval(e.args[0], node_of, deadlocked) || eval(e.args[1], node_of, deadlocked);
      case PropExpr::Kind::Loc:
      case PropExpr::Kind::Compare: return atom(e, node_of);
    }
    return false;
  }

  bool atom(const PropExpr& e, const NodeOf& node_of) const {
    if (e.kind == PropExpr::Kind::Loc) {
      const std::size_t c = space_.component_of[e.process];
      const Component& comp = space_.components[c];
      const ComponentNode& n = comp.nodes[node_of(c)];
      const std::size_t slot = comp.slot(e.process);
      const InstanceState& inst = e.physician ? n.physicians[slot] : n.organs[slot];
      return inst.location == e.state_index;
    }
    const Value l = operand(e.lhs, node_of);
    const Value r = operand(e.rhs, node_of);
    const auto o = compare_values(l, r);
    switch (e.op) {
      case CmpOp::Eq: return o == 0;
      case CmpOp::Ne: return o != 0;
      case CmpOp::Lt: return o < 0;
      case CmpOp::Le: return o <= 0;
      case CmpOp::Gt: return o > 0;
      case CmpOp::Ge: return o >= 0;
    }
    return false;
  }

 private:
  Value operand(const Operand& o, const NodeOf& node_of) const {
    if (o.kind == Operand::Kind::Const) return o.value;
    const std::size_t c = space_.component_of[o.process];
    const Component& comp = space_.components[c];
    const ComponentNode& n = comp.nodes[node_of(c)];
    const std::size_t slot = comp.slot(o.process);
    switch (o.kind) {
      case Operand::Kind::Input: {
        const auto k = static_cast<std::size_t>(std::find(comp.inputs.begin(), comp.inputs.end(), o.name) - comp.inputs.begin());
        return comp.domains[k][n.inputs[k]];
      }
      case Operand::Kind::Local: return (o.physician ? n.physicians[slot] : n.organs[slot]).locals.at(o.name);
      case Operand::Kind::Counter: {
        if (space_.options.organs_only) return Value::integer(0);
        if (o.only_in && n.organs[slot].location != *o.only_in) return Value::integer(0);
        return Value::integer(n.protocols[slot].counter);
      }
      default: break;
    }
    return Value::integer(0);
  }

  const StateSpace& space_;
};

// ---------------------------------------------------------------------------
// Disjunctive normal form over component-local literals

struct Literal {
  const PropExpr* atom = nullptr;  // null: deadlock of `component`
  std::size_t component = 0;
  bool negated = false;
};
using Conj = std::vector<Literal>;
using Dnf = std::vector<Conj>;

class DnfBuilder {
 public:
  DnfBuilder(const StateSpace& space, const Evaluator& ev) : space_(space), ev_(ev) {}

  std::optional<Dnf> build(const PropExpr& e, bool neg) {
    switch (e.kind) {
      case PropExpr::Kind::True: return neg ? Dnf{} : Dnf{Conj{}};
      case PropExpr::Kind::False: return neg ? Dnf{Conj{}} : Dnf{};
      case PropExpr::Kind::Not: return build(e.args[0], !neg);
      case PropExpr::Kind::And:
      case PropExpr::Kind::Or: {
        auto a = build(e.args[0], neg);
        auto b = build(e.args[1], neg);
        if (!a || !b) return std::nullopt;
        const bool conj = (e.kind == PropExpr::Kind::And) != neg;
        return conj ? product(*a, *b) : unite(*a, *b);
      }
      case PropExpr::Kind::Imply: {
        // a -> b  ==  !a || b
        auto a = build(e.args[0], !neg);
        auto b = build(e.args[1], neg);
        if (!a || !b) return std::nullopt;
        return neg ? product(*a, *b) : unite(*a, *b);
      }
      case PropExpr::Kind::Deadlock: {
        const std::size_t k = space_.components.size();
        if (!neg) {
          Conj c;
          for (std::size_t i = 0; i < k; ++i) c.push_back({nullptr, i, false});
          return Dnf{c};
        }
        Dnf d;
        for (std::size_t i = 0; i < k; ++i) d.push_back(Conj{{nullptr, i, true}});
        return d;
      }
      case PropExpr::Kind::Loc:
      case PropExpr::Kind::Compare: {
        std::set<std::size_t> comps;
        for (std::size_t p : processes_read(e, space_.pack->size())) comps.insert(space_.component_of[p]);
        if (comps.size() > 1) return std::nullopt;
        if (comps.empty()) {
          const bool v = ev_.atom(e, [](std::size_t) { return 0u; }) != neg;
          return v ? Dnf{Conj{}} : Dnf{};
        }
        return Dnf{Conj{{&e, *comps.begin(), neg}}};
      }
    }
    return std::nullopt;
  }

 private:
  static std::optional<Dnf> unite(Dnf a, const Dnf& b) {
    a.insert(a.end(), b.begin(), b.end());
    if (a.size() > kDnfLimit) return std::nullopt;
    return a;
  }

  static std::optional<Dnf> product(const Dnf& a, const Dnf& b) {
    if (a.size() * b.size() > kDnfLimit) return std::nullopt;
    Dnf out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        Conj c = x;
        c.insert(c.end(), y.begin(), y.end());
        out.push_back(std::move(c));
      }
    }
    return out;
  }

  const StateSpace& space_;
  const Evaluator& ev_;
};

// ---------------------------------------------------------------------------

struct Outcome {
  bool satisfied = false;
  Trace trace;
  std::size_t nodes = 0;
  std::string method;
};

class Checker {
 public:
  Checker(const StateSpace& space, const CheckOptions& options) : space_(space), options_(options), ev_(space) {}

  Outcome run(Quantifier q, const PropExpr& body) {
    const bool stutter = options_.stutter == StutterMode::On ||
                         (options_.stutter == StutterMode::Auto && (q == Quantifier::AF || q == Quantifier::EG));
    std::set<std::size_t> comps;
    for (std::size_t p : processes_read(body, space_.pack->size())) comps.insert(space_.component_of[p]);
    if (comps.empty()) comps.insert(0);
    const bool local = comps.size() == 1;
    const bool single = space_.components.size() == 1;
    const bool path_quantifier = q == Quantifier::AG || q == Quantifier::EF;

    if (local && (single || path_quantifier || stutter)) {
      const std::size_t c = *comps.begin();
      const Component& comp = space_.components[c];
      Graph g{&comp.edges, &comp.labels, stutter};
      std::vector<char> sat(comp.nodes.size());
      for (std::uint32_t n = 0; n < sat.size(); ++n) {
        sat[n] = ev_.eval(body, [&](std::size_t) { return n; }, g.deadlocked(n));
      }
      Outcome o = decide(q, g, sat);
      o.nodes = comp.nodes.size();
      o.method = "component";
      return o;
    }
    if (path_quantifier && !stutter &&
        std::all_of(space_.components.begin(), space_.components.end(), [](const Component& c) { return c.stable; })) {
      DnfBuilder builder(space_, ev_);
      if (auto dnf = builder.build(body, q == Quantifier::AG)) {
        auto found = reach(*dnf);
        Outcome o;
        o.satisfied = (q == Quantifier::EF) == found.has_value();
        if (found) o.trace = std::move(*found);
        o.nodes = space_.total_nodes();
        o.method = "decomposed";
        return o;
      }
    }
    build_product();
    Graph g{&product_edges_, &product_labels_, stutter};
    std::vector<char> sat(product_nodes_.size());
    for (std::uint32_t n = 0; n < sat.size(); ++n) {
      sat[n] = ev_.eval(body, [&](std::size_t c) { return product_nodes_[n][c]; }, g.deadlocked(n));
    }
    Outcome o = decide(q, g, sat);
    o.nodes = product_nodes_.size();
    o.method = "product";
    return o;
  }

 private:
  static Outcome decide(Quantifier q, const Graph& g, std::vector<char>& sat) {
    Outcome o;
    switch (q) {
      case Quantifier::EF: {
        auto p = find_path(g, sat);
        o.satisfied = p.has_value();
        if (p) o.trace = std::move(*p);
        break;
      }
      case Quantifier::AG: {
        for (auto& s : sat) s = !s;
        auto p = find_path(g, sat);
        o.satisfied = !p.has_value();
        if (p) o.trace = std::move(*p);
        break;
      }
      case Quantifier::AF: {
        for (auto& s : sat) s = !s;
        auto l = find_lasso(g, sat);
        o.satisfied = !l.has_value();
        if (l) o.trace = std::move(*l);
        break;
      }
      case Quantifier::EG: {
        auto l = find_lasso(g, sat);
        o.satisfied = l.has_value();
        if (l) o.trace = std::move(*l);
        break;
      }
    }
    return o;
  }

  bool literal_holds(const Literal& l, const Component& comp, std::uint32_t n, std::size_t c) const {
    bool v;
    if (!l.atom) v = comp.edges[n].empty();
    else v = ev_.atom(*l.atom, [&](std::size_t) { return n; });
    (void)c;
    return v != l.negated;
  }

  /// Shortest witness for E<> of a disjunction of component-local
  /// conjunctions. All components are stable, so after the first ingest the
  /// space is the interleaving of independent component graphs.
  std::optional<Trace> reach(const Dnf& dnf) {
    const std::size_t k = space_.components.size();
    std::optional<std::pair<std::size_t, Trace>> best;
    for (const Conj& conj : dnf) {
      // Distance to the nearest node satisfying this component's literals.
      std::vector<std::vector<std::int64_t>> dist(k);
      bool init_ok = true;
      for (std::size_t c = 0; c < k; ++c) {
        const Component& comp = space_.components[c];
        std::vector<char> sat(comp.nodes.size(), 1);
        for (const Literal& l : conj) {
          if (l.component != c) continue;
          for (std::uint32_t n = 0; n < sat.size(); ++n) {
            if (sat[n] && !literal_holds(l, comp, n, c)) sat[n] = 0;
          }
        }
        init_ok = init_ok && sat[0];
        dist[c] = backward_distance(comp, sat);
      }
      if (init_ok) return Trace{};
      for (std::size_t c = 0; c < k; ++c) {
        const Component& comp = space_.components[c];
        for (const Edge& e : comp.edges[0]) {
          std::vector<std::uint32_t> start(k);
          for (std::size_t d = 0; d < k; ++d) start[d] = d == c ? e.target : space_.components[d].resample[0];
          std::size_t total = 1;
          bool ok = true;
          for (std::size_t d = 0; d < k && ok; ++d) {
            if (dist[d][start[d]] < 0) ok = false;
            else total += static_cast<std::size_t>(dist[d][start[d]]);
          }
          if (!ok || (best && best->first <= total)) continue;
          Trace t;
          t.steps.push_back(comp.labels[e.label]);
          for (std::size_t d = 0; d < k; ++d) {
            const Component& cd = space_.components[d];
            std::uint32_t x = start[d];
            while (dist[d][x] > 0) {
              for (const Edge& f : cd.edges[x]) {
                if (dist[d][f.target] == dist[d][x] - 1) {
                  t.steps.push_back(cd.labels[f.label]);
                  x = f.target;
                  break;
                }
              }
            }
          }
          best = {total, std::move(t)};
        }
      }
    }
    if (!best) return std::nullopt;
    return std::move(best->second);
  }

  static std::vector<std::int64_t> backward_distance(const Component& comp, const std::vector<char>& sat) {
    const std::size_t n = comp.nodes.size();
    std::vector<std::vector<std::uint32_t>> rev(n);
    for (std::uint32_t x = 0; x < n; ++x) {
      for (const Edge& e : comp.edges[x]) rev[e.target].push_back(x);
    }
    std::vector<std::int64_t> dist(n, -1);
    std::deque<std::uint32_t> q;
    for (std::uint32_t x = 0; x < n; ++x) {
      if (sat[x]) {
        dist[x] = 0;
        q.push_back(x);
      }
    }
    while (!q.empty()) {
      const std::uint32_t x = q.front();
      q.pop_front();
      for (std::uint32_t y : rev[x]) {
        if (dist[y] >= 0) continue;
        dist[y] = dist[x] + 1;
        q.push_back(y);
      }
    }
    return dist;
  }

  void build_product() {
    if (built_) return;
    built_ = true;
    const std::size_t k = space_.components.size();
    std::unordered_map<std::string, std::uint32_t> index;
    std::map<std::string, std::uint32_t> label_index;
    auto key_of = [](const std::vector<std::uint32_t>& t) {
      return std::string(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(std::uint32_t));
    };
    auto intern = [&](std::vector<std::uint32_t> t) {
      auto [it, inserted] = index.emplace(key_of(t), static_cast<std::uint32_t>(product_nodes_.size()));
      if (inserted) {
        if (product_nodes_.size() >= options_.product_cap) {
          throw ResourceError("explicit product exceeds the cap of " + std::to_string(options_.product_cap) + " nodes");
        }
        product_nodes_.push_back(std::move(t));
        product_edges_.emplace_back();
      }
      return it->second;
    };
    auto label = [&](const EdgeLabel& l) {
      auto [it, inserted] = label_index.emplace(l.str(), static_cast<std::uint32_t>(product_labels_.size()));
      if (inserted) product_labels_.push_back(l);
      return it->second;
    };
    intern(std::vector<std::uint32_t>(k, 0));
    for (std::uint32_t id = 0; id < product_nodes_.size(); ++id) {
      const std::vector<std::uint32_t> tuple = product_nodes_[id];
      std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
      for (std::size_t c = 0; c < k; ++c) {
        const Component& comp = space_.components[c];
        for (const Edge& e : comp.edges[tuple[c]]) {
          const EdgeLabel& l = comp.labels[e.label];
          std::vector<std::uint32_t> next = tuple;
          next[c] = e.target;
          if (l.ingests()) {
            for (std::size_t d = 0; d < k; ++d) {
              if (d != c) next[d] = space_.components[d].resample[tuple[d]];
            }
          }
          const std::uint32_t target = intern(std::move(next));
          const std::uint32_t lab = label(l);
          if (seen.emplace(target, lab).second) product_edges_[id].push_back({target, lab});
        }
      }
    }
  }

  const StateSpace& space_;
  CheckOptions options_;
  Evaluator ev_;
  bool built_ = false;
  std::vector<std::vector<std::uint32_t>> product_nodes_;
  std::vector<std::vector<Edge>> product_edges_;
  std::vector<EdgeLabel> product_labels_;
};

}  // namespace

Verdict check(const StateSpace& space, const PropertyAst& property, const CheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (auto c = max_counter_constant(property.body); c && *c >= space.options.counter_cap) {
    throw PreconditionError("counter constant " + std::to_string(*c) + " needs a counter cap above " +
                            std::to_string(space.options.counter_cap));
  }
  Checker checker(space, options);
  Verdict v;
  v.formula = property.text;
  v.quantifier = property.quantifier;
  Outcome o = checker.run(property.quantifier, property.body);
  v.satisfied = o.satisfied;
  v.trace = std::move(o.trace);
  v.nodes_visited = o.nodes;
  v.method = std::move(o.method);
  if (property.quantifier == Quantifier::AF && property.body.kind == PropExpr::Kind::Imply) {
    Outcome inv = checker.run(Quantifier::AG, property.body);
    v.invariant_reading = Verdict::Reading{inv.satisfied, std::move(inv.trace), inv.nodes, std::move(inv.method)};
  }
  v.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return v;
}

}  // namespace gsm::checker
