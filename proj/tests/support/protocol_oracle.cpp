#include "protocol_oracle.hpp"

#include <memory>
#include <random>
#include <sstream>

#include "gsm/compile.hpp"
#include "gsm/engine.hpp"
#include "gsm/service/runtime.hpp"

namespace gsm::testing {

ReferenceProtocol::ReferenceProtocol(Millis t_short, Millis t_long, std::string s, std::string b)
    : t_short_(t_short), t_long_(t_long), s_(std::move(s)), b_(std::move(b)) {}

void ReferenceProtocol::restart(Millis now) {
  if (s_ != b_) {
    prev_s_ = s_;
    prev_b_ = b_;
    ++counter_;
    alerts_.push_back({now, AlertStage::First, counter_, s_, b_});
    pc_ = Pc::WaitShort;
    deadline_ = now + t_short_;
  } else {
    counter_ = 0;
    pc_ = Pc::Converged;
  }
}

void ReferenceProtocol::advance(Millis now) {
  while ((pc_ == Pc::WaitShort || pc_ == Pc::WaitLong) && deadline_ <= now) {
    // The wait ran out with (S, B) unchanged: PrevS == S && PrevB == B.
    ++counter_;
    if (pc_ == Pc::WaitShort) {
      alerts_.push_back({deadline_, AlertStage::Second, counter_, prev_s_, prev_b_});
      pc_ = Pc::WaitLong;
      deadline_ += t_long_;
    } else {
      alerts_.push_back({deadline_, AlertStage::Final, counter_, prev_s_, prev_b_});
      pc_ = Pc::Held;
    }
  }
}

void ReferenceProtocol::update(const std::string& s, const std::string& b, Millis now) {
  if (s == s_ && b == b_) return;
  s_ = s;
  b_ = b;
  restart(now);
}

namespace {

using service::json;

std::string oracle_pack(Millis t_short, Millis t_long) {
  std::ostringstream out;
  out << "pack Oracle\n"
      << "protocol {\n  t_short " << t_short << "\n  t_long " << t_long << "\n}\n"
      << "automaton P {\n"
      << "  input x: int range 0..1 step 1\n"
      << "  initial Lo\n  state Lo\n  state Hi\n"
      << "  trans Lo -> Hi when x == 1\n"
      << "  trans Hi -> Lo when x == 0\n"
      << "}\n"
      << "guidelines {\n  (P=Lo) -> \"steady low\"\n  (P=Hi) -> \"steady high\"\n}\n";
  return out.str();
}

enum class Sym { Organ, Belief, Tick };

std::string describe(const std::vector<Sym>& seq) {
  std::string out;
  for (Sym s : seq) out += s == Sym::Organ ? 'o' : s == Sym::Belief ? 'b' : 't';
  return out;
}

/// Engine and manager driven in the session runtime's order.
struct System {
  Engine engine;
  BestPracticeManager bpm;
  int x = 0;
  Millis t = 0;

  std::vector<ProtocolAction> apply(Sym s, Millis tick_ms) {
    std::vector<ProtocolAction> out;
    auto take = [&](std::vector<ProtocolAction> a) { out.insert(out.end(), a.begin(), a.end()); };
    if (s == Sym::Tick) {
      t += tick_ms;
      take(bpm.advance_to(t));
      engine.advance_to(t);
      return out;
    }
    // Snapshots need strictly increasing timestamps; physician events may share one.
    if (s == Sym::Organ) t += 1;
    take(bpm.advance_to(t));
    if (s == Sym::Organ) {
      x = 1 - x;
      engine.ingest(Snapshot{t, {{"x", Value::integer(x)}}});
    } else {
      const std::string other = engine.current_belief()[0] == "Lo" ? "Hi" : "Lo";
      engine.apply_physician_event(PhysicianEvent{t, "P", PhysicianEvent::Kind::Jump, other});
    }
    take(bpm.evaluate(engine.current_state(), engine.current_belief(), t));
    return out;
  }
};

struct Explorer {
  Millis tick_ms;
  int max_length;
  ProtocolOracleReport report;
  std::vector<Sym> seq;

  void fail(const std::string& what) {
    if (report.mismatches++ == 0) report.first_mismatch = describe(seq) + ": " + what;
  }

  void compare(const System& sys, const ReferenceProtocol& oracle, const std::vector<ProtocolAction>& actions,
               std::size_t alerts_before) {
    std::vector<OracleAlert> got;
    for (const auto& a : actions) {
      if (a.kind != ProtocolAction::Kind::Alert) continue;
      const DeviationRecord* rec = nullptr;
      for (const auto& l : actions) {
        if (l.kind == ProtocolAction::Kind::LogDeviation && l.t == a.t && l.counter == a.counter) rec = &l.record;
      }
      got.push_back({a.t, a.stage, a.counter, rec ? rec->organ_state : "?", rec ? rec->belief : "?"});
    }
    const std::vector<OracleAlert> want(oracle.alerts().begin() + static_cast<std::ptrdiff_t>(alerts_before),
                                        oracle.alerts().end());
    if (got != want) fail("alerts differ (" + std::to_string(got.size()) + " vs " + std::to_string(want.size()) + ")");
    if (sys.bpm.process(0).counter() != oracle.counter()) {
      fail("counter " + std::to_string(sys.bpm.process(0).counter()) + " vs " + std::to_string(oracle.counter()));
    }
    const StateTuple s = sys.engine.current_state();
    if (s == sys.engine.current_belief()) {
      ++report.converged_steps;
      if (!oracle.displaying()) fail("oracle not on the display branch while S == B");
      if (sys.bpm.process(0).counter() != 0) fail("counter not reset while S == B");
      if (!sys.bpm.displayed() || *sys.bpm.displayed() != s) fail("G' not displayed for S");
      else if (sys.bpm.current_guidelines() != sys.bpm.lookup_guidelines(s)) fail("displayed G' is not the row for S");
    }
  }

  void dfs(const System& sys, const ReferenceProtocol& oracle) {
    if (static_cast<int>(seq.size()) == max_length) return;
    for (Sym s : {Sym::Organ, Sym::Belief, Sym::Tick}) {
      System next = sys;
      ReferenceProtocol o = oracle;
      seq.push_back(s);
      const std::size_t before = o.alerts().size();
      const auto actions = next.apply(s, tick_ms);
      o.advance(next.t);
      if (s != Sym::Tick) o.update(next.engine.current_state()[0], next.engine.current_belief()[0], next.t);
      ++report.sequences;
      compare(next, o, actions, before);
      dfs(next, o);
      seq.pop_back();
    }
  }
};

}  // namespace

ProtocolOracleReport run_protocol_oracle(int max_length, std::size_t runtime_samples, Millis t_short, Millis t_long,
                                         Millis tick_ms) {
  auto pack = std::make_shared<const CompiledPack>(compile_source(oracle_pack(t_short, t_long)));
  System root{Engine(pack), BestPracticeManager(pack->source)};
  root.bpm.advance_to(0);
  root.engine.ingest(Snapshot{0, {{"x", Value::integer(0)}}});
  root.bpm.evaluate(root.engine.current_state(), root.engine.current_belief(), 0);
  const ReferenceProtocol oracle(t_short, t_long, "Lo", "Lo");

  Explorer ex{tick_ms, max_length, {}, {}};
  ex.dfs(root, oracle);
  ProtocolOracleReport report = ex.report;

  // Held divergence: one organ change, then ticks until both timers have run out.
  {
    System sys = root;
    std::vector<AlertStage> stages;
    auto collect = [&](const std::vector<ProtocolAction>& acts) {
      for (const auto& a : acts) {
        if (a.kind == ProtocolAction::Kind::Alert) stages.push_back(a.stage);
      }
    };
    collect(sys.apply(Sym::Organ, tick_ms));
    const int ticks = static_cast<int>((t_short + t_long) / tick_ms) + 3;
    for (int i = 0; i < ticks; ++i) collect(sys.apply(Sym::Tick, tick_ms));
    report.held_cascade = stages == std::vector<AlertStage>{AlertStage::First, AlertStage::Second, AlertStage::Final} &&
                          sys.bpm.process(0).counter() == 3 && sys.bpm.deviation_log().size() == 3;
  }

  // Same comparison through the session runtime and its JSON log.
  std::mt19937 rng(7);
  for (std::size_t k = 0; k < runtime_samples; ++k) {
    service::Runtime rt(pack);
    rt.ingest(Snapshot{0, {{"x", Value::integer(0)}}});
    ReferenceProtocol o(t_short, t_long, "Lo", "Lo");
    Millis t = 0;
    int x = 0;
    std::vector<json> alerts;
    std::vector<Sym> seq;
    for (int i = 0; i < max_length; ++i) {
      const Sym s = static_cast<Sym>(std::uniform_int_distribution<int>(0, 2)(rng));
      seq.push_back(s);
      std::vector<json> recs;
      if (s == Sym::Tick) {
        t += tick_ms;
        recs = rt.advance_to(t);
      } else if (s == Sym::Organ) {
        t += 1;
        x = 1 - x;
        recs = rt.ingest(Snapshot{t, {{"x", Value::integer(x)}}});
      } else {
        const std::string other = rt.engine().current_belief()[0] == "Lo" ? "Hi" : "Lo";
        recs = rt.physician(PhysicianEvent{t, "P", PhysicianEvent::Kind::Jump, other});
      }
      o.advance(t);
      if (s != Sym::Tick) o.update(rt.engine().current_state()[0], rt.engine().current_belief()[0], t);
      for (auto& r : recs) {
        if (r.at("kind") == "Alert") alerts.push_back(r);
      }
    }
    bool same = alerts.size() == o.alerts().size();
    for (std::size_t i = 0; same && i < alerts.size(); ++i) {
      const OracleAlert& a = o.alerts()[i];
      same = alerts[i].at("t") == a.t && alerts[i].at("stage") == std::string(to_string(a.stage)) &&
             alerts[i].at("counter") == a.counter;
    }
    if (!same && report.mismatches++ == 0) report.first_mismatch = "runtime log, sequence " + describe(seq);
    ++report.runtime_samples;
  }
  return report;
}

}  // namespace gsm::testing
