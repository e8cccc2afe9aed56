#pragma once

// Shared drivers for the property tests and the acceptance report.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gsm/checker/check.hpp"
#include "gsm/compile.hpp"
#include "gsm/service/runtime.hpp"
#include "random_pack.hpp"

namespace gsm::testing {

/// Repository root, fixed at configure time.
std::filesystem::path source_dir();
std::string read_text(const std::filesystem::path& p);

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- checker against the brute-force reference -----------------------------

struct OracleOptions {
  int packs = 50;
  int properties_per_pack = 12;
  std::size_t max_product_nodes = 200;
  int counter_cap = 2;
  std::uint32_t seed = 1;
};

struct OracleReport {
  int packs = 0;
  int multi_component_packs = 0;
  std::size_t largest = 0;
  int verdicts = 0;
  int mismatches = 0;
  int bad_traces = 0;
  int satisfied = 0;
  std::vector<std::string> methods_seen;
  std::string first_problem;
};

/// Random formula over the pack's locations, inputs, counters and deadlock.
std::string random_property(std::mt19937& rng, const CompiledPack& pack, int counter_cap);

OracleReport compare_with_reference(const OracleOptions& options);

// --- lowering ---------------------------------------------------------------

struct LoweringReport {
  int charts = 0;
  int steps = 0;
  int mismatches = 0;
  int events = 0;        // emitted events compared
  int timer_events = 0;  // steps where a periodic action fired
  std::string first_problem;
};

LoweringReport co_simulate_lowering(int charts, int steps, std::uint32_t seed);

// --- scenarios --------------------------------------------------------------

/// Replays a scenario through a fresh runtime.
service::Runtime replay(std::shared_ptr<const CompiledPack> pack, const std::string& scenario_text);

Outcome property_suite_criterion();
Outcome checker_oracle_criterion();
Outcome protocol_oracle_criterion();
Outcome lowering_criterion();
Outcome replay_criterion();
Outcome inconsistency_criterion();
Outcome convergence_criterion();

}  // namespace gsm::testing
