#pragma once

// Explicit state space of a compiled pack, built per component.
//
// Processes (organ automaton + physician twin + protocol instance) that
// share no input are independent, so the space is built as one graph per
// group of input-sharing processes ("component"). Nodes hold the discrete
// input values, every automaton instance, the protocol state and a
// `started` flag (set by the first ingest; physician events and time
// steps are only possible once started).
//
// Edges, each replayable as an engine command:
//   snapshot x=v      one input changes, every organ ingests, protocols evaluate
//   resample          ingest with unchanged inputs (only when it changes the node)
//   confirm P s       physician confirms the suggested state s of process P
//   jump P s          physician jumps to s
//   tick P d          d ms pass for the component's protocols and clocks; d is
//                     the distance to the next timer or clock breakpoint
//   stutter           nothing changes (only with implicit stutter enabled)
//
// Deviation counters saturate at `counter_cap`; clocks saturate past the
// largest constant they are compared against.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsm/compile.hpp"
#include "gsm/guidance.hpp"
#include "gsm/step.hpp"

namespace gsm::checker {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpaceOptions {
  std::size_t node_cap = 5'000'000;
  int counter_cap = 4;
  /// Ignore the pack's discretization block and use declared ranges.
  bool full_domains = false;
  /// Organ automata and inputs only: no physician events, no protocol.
  bool organs_only = false;
};

struct EdgeLabel {
  enum class Kind { Snapshot, Resample, Confirm, Jump, Tick, Stutter };
  Kind kind = Kind::Resample;
  std::string name;   // input (Snapshot) or organ automaton (Confirm/Jump/Tick)
  Value value;        // Snapshot
  std::string state;  // Confirm/Jump
  Millis delta = 0;   // Tick

  std::string str() const;
  bool ingests() const { return kind == Kind::Snapshot || kind == Kind::Resample; }
};

struct Edge {
  std::uint32_t target;
  std::uint32_t label;  // index into Component::labels
};

struct ComponentNode {
  bool started = false;
  std::vector<std::uint16_t> inputs;        // index into Component::domains[k]
  std::vector<InstanceState> organs;        // per process of the component
  std::vector<InstanceState> physicians;
  std::vector<ProtocolSnapshot> protocols;
};

class Component {
 public:
  std::vector<std::size_t> processes;       // pack indices, ascending
  std::vector<std::string> inputs;          // input names owned by these processes
  std::vector<std::vector<Value>> domains;  // per input

  std::vector<ComponentNode> nodes;         // node 0 is initial
  std::vector<std::vector<Edge>> edges;
  std::vector<EdgeLabel> labels;
  /// Target of the resample edge of each node, or the node itself.
  std::vector<std::uint32_t> resample;
  std::size_t edge_count = 0;
  /// Every started node is unchanged by a resample.
  bool stable = true;

  /// Slot of pack process `p` within this component.
  std::size_t slot(std::size_t p) const;
  Valuation input_values(const ComponentNode& n) const;
};

struct StateSpace {
  std::shared_ptr<const CompiledPack> pack;
  SpaceOptions options;
  std::vector<Component> components;
  std::vector<std::size_t> component_of;  // per process
  std::vector<Machine> organ_machines;
  std::vector<Machine> physician_machines;

  std::size_t total_nodes() const;
  std::size_t total_edges() const;
  /// Product of component node counts (an upper bound on product nodes).
  double product_bound() const;
};

/// Breadth-first construction of every component. Throws PreconditionError
/// for an input without a finite domain or a clock compared with a
/// non-constant, and ResourceError when `node_cap` is exceeded.
StateSpace build_state_space(std::shared_ptr<const CompiledPack> pack, const SpaceOptions& options = {});

/// Discrete domain of each input used by the checker.
std::vector<Value> checker_domain(const ModelPack& pack, std::string_view input, bool full_domains);

}  // namespace gsm::checker
