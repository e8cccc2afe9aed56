// Acceptance report: one PASS/FAIL line per primary criterion.

#include <exception>
#include <functional>
#include <iostream>

#include "experiments.hpp"

int main() {
  using gsm::testing::Outcome;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"property-suite", gsm::testing::property_suite_criterion},
      {"checker-oracle", gsm::testing::checker_oracle_criterion},
      {"protocol-oracle", gsm::testing::protocol_oracle_criterion},
      {"lowering-equivalence", gsm::testing::lowering_criterion},
      {"case-study-replays", gsm::testing::replay_criterion},
      {"pea-with-pressure", gsm::testing::inconsistency_criterion},
      {"convergence", gsm::testing::convergence_criterion},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
