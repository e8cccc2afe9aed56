#include "gsm/guidance.hpp"

#include <algorithm>

namespace gsm {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Converged: return "Converged";
    case Phase::Diverged1: return "Diverged1";
    case Phase::Diverged2: return "Diverged2";
    case Phase::DivergedFinal: return "DivergedFinal";
  }
  return "?";
}

std::string_view to_string(AlertStage s) {
  switch (s) {
    case AlertStage::First: return "First";
    case AlertStage::Second: return "Second";
    case AlertStage::Final: return "Final";
  }
  return "?";
}

std::string_view to_string(ProtocolAction::Kind k) {
  switch (k) {
    case ProtocolAction::Kind::Alert: return "Alert";
    case ProtocolAction::Kind::DisplayGuidelines: return "DisplayGuidelines";
    case ProtocolAction::Kind::ResetCounter: return "ResetCounter";
    case ProtocolAction::Kind::LogDeviation: return "Deviation";
  }
  return "?";
}

DivergenceProtocol::DivergenceProtocol(std::string automaton, ProtocolTimers timers)
    : automaton_(std::move(automaton)), timers_(timers) {}

void DivergenceProtocol::alert(AlertStage stage, Millis t, std::vector<ProtocolAction>& out) {
  ++st_.counter;
  ProtocolAction a;
  a.kind = ProtocolAction::Kind::Alert;
  a.t = t;
  a.automaton = automaton_;
  a.stage = stage;
  a.counter = st_.counter;
  out.push_back(a);

  ProtocolAction log;
  log.kind = ProtocolAction::Kind::LogDeviation;
  log.t = t;
  log.automaton = automaton_;
  log.stage = stage;
  log.counter = st_.counter;
  log.record = DeviationRecord{t, automaton_, st_.prev_s, st_.prev_b, stage, st_.counter};
  out.push_back(std::move(log));
}

void DivergenceProtocol::converge(Millis t, std::vector<ProtocolAction>& out) {
  st_.phase = Phase::Converged;
  st_.remaining = 0;
  st_.counter = 0;
  st_.announced = true;
  ProtocolAction a;
  a.kind = ProtocolAction::Kind::ResetCounter;
  a.t = t;
  a.automaton = automaton_;
  a.counter = 0;
  out.push_back(std::move(a));
}

std::vector<ProtocolAction> DivergenceProtocol::evaluate(const std::string& s, const std::string& b, Millis now) {
  std::vector<ProtocolAction> out;
  if (st_.phase != Phase::Converged && s == st_.prev_s && b == st_.prev_b) return out;
  if (s != b) {
    st_.prev_s = s;
    st_.prev_b = b;
    st_.announced = false;
    st_.phase = Phase::Diverged1;
    st_.remaining = timers_.t_short;
    alert(AlertStage::First, now, out);
  } else if (st_.phase != Phase::Converged || !st_.announced) {
    converge(now, out);
  }
  return out;
}

std::vector<ProtocolAction> DivergenceProtocol::tick(Millis delta, Millis start) {
  std::vector<ProtocolAction> out;
  Millis elapsed = 0;
  while (armed() && delta - elapsed >= st_.remaining) {
    elapsed += st_.remaining;
    if (st_.phase == Phase::Diverged1) {
      st_.phase = Phase::Diverged2;
      st_.remaining = timers_.t_long;
      alert(AlertStage::Second, start + elapsed, out);
    } else {
      st_.phase = Phase::DivergedFinal;
      st_.remaining = 0;
      alert(AlertStage::Final, start + elapsed, out);
    }
  }
  if (armed()) st_.remaining -= delta - elapsed;
  return out;
}

std::vector<std::string> lookup_guidelines(const GuidelineTable& table, const StateTuple& s) {
  for (const auto& rule : table.rules) {
    if (rule.pattern.size() != s.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < s.size() && match; ++i) match = !rule.pattern[i] || *rule.pattern[i] == s[i];
    if (match) return rule.texts;
  }
  std::string tuple;
  for (const auto& x : s) tuple += (tuple.empty() ? "" : ", ") + x;
  throw NoGuidelineError("no guideline row matches (" + tuple + ")");
}

BestPracticeManager::BestPracticeManager(const ModelPack& pack) : table_(pack.guidelines) {
  for (const auto& a : pack.automata) protocols_.emplace_back(a.name, pack.protocol);
}

std::vector<std::string> BestPracticeManager::lookup_guidelines(const StateTuple& s) const {
  return gsm::lookup_guidelines(table_, s);
}

void BestPracticeManager::record(const std::vector<ProtocolAction>& actions) {
  for (const auto& a : actions) {
    if (a.kind == ProtocolAction::Kind::LogDeviation) log_.push_back(a.record);
  }
}

std::vector<ProtocolAction> BestPracticeManager::advance_to(Millis now) {
  if (now < now_) throw std::invalid_argument("protocol time cannot move backwards");
  std::vector<ProtocolAction> out;
  for (auto& p : protocols_) {
    auto acts = p.tick(now - now_, now_);
    out.insert(out.end(), acts.begin(), acts.end());
  }
  std::stable_sort(out.begin(), out.end(), [](const ProtocolAction& a, const ProtocolAction& b) { return a.t < b.t; });
  now_ = now;
  record(out);
  return out;
}

std::vector<ProtocolAction> BestPracticeManager::evaluate(const StateTuple& s, const StateTuple& b, Millis now) {
  if (s.size() != protocols_.size() || b.size() != protocols_.size()) {
    throw std::invalid_argument("state tuple arity does not match the pack");
  }
  std::vector<ProtocolAction> out = advance_to(now);
  const std::size_t first_new = out.size();
  for (std::size_t i = 0; i < protocols_.size(); ++i) {
    auto acts = protocols_[i].evaluate(s[i], b[i], now);
    out.insert(out.end(), acts.begin(), acts.end());
  }
  record(std::vector<ProtocolAction>(out.begin() + static_cast<std::ptrdiff_t>(first_new), out.end()));

  if (s == b) {
    if (displayed_ != s) {
      ProtocolAction d;
      d.kind = ProtocolAction::Kind::DisplayGuidelines;
      d.t = now;
      d.state = s;
      try {
        d.guidelines = lookup_guidelines(s);
      } catch (const NoGuidelineError&) {
      }
      displayed_ = s;
      current_guidelines_ = d.guidelines;
      out.push_back(std::move(d));
    }
  } else {
    displayed_.reset();
  }
  return out;
}

std::optional<Millis> BestPracticeManager::next_deadline() const {
  std::optional<Millis> best;
  for (const auto& p : protocols_) {
    if (!p.armed()) continue;
    const Millis t = now_ + p.remaining();
    if (!best || t < *best) best = t;
  }
  return best;
}

}  // namespace gsm
