#include "gsm/service/runtime.hpp"

#include <algorithm>
#include <cctype>

namespace gsm::service {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Millis require_time(const json& j) {
  if (!j.contains("t")) throw std::invalid_argument("missing 't'");
  const json& t = j.at("t");
  if (!t.is_number_integer() || t.get<Millis>() < 0) throw std::invalid_argument("'t' must be a non-negative integer");
  return t.get<Millis>();
}

json deviation_json(const DeviationRecord& r) {
  return {{"t", r.t},
          {"automaton", r.automaton},
          {"organ_state", r.organ_state},
          {"belief", r.belief},
          {"stage", std::string(to_string(r.stage))},
          {"counter", r.counter}};
}

}  // namespace

Value value_from_json(const json& j) {
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number_float()) return Value::decimal(Decimal::from_double(j.get<double>()));
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (auto d = Decimal::parse(s)) return Value::decimal(*d);
    if (!s.empty() && (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return Value::enumerator(s);
  }
  throw std::invalid_argument("unsupported value " + j.dump());
}

json value_to_json(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: return v.as_int();
    case ValueType::Decimal: return v.as_decimal().to_double();
    case ValueType::Enum: return v.as_enum();
  }
  return nullptr;
}

Command parse_command(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  Command c;
  c.t = require_time(j);
  const std::string kind = j.contains("kind") && j.at("kind").is_string() ? j.at("kind").get<std::string>() : "";
  if (kind == "snapshot") {
    c.kind = Command::Kind::Snapshot;
    c.snapshot.t = c.t;
    if (!j.contains("values") || !j.at("values").is_object()) throw std::invalid_argument("snapshot needs a 'values' object");
    for (const auto& [name, v] : j.at("values").items()) c.snapshot.values[name] = value_from_json(v);
  } else if (kind == "physician") {
    c.kind = Command::Kind::Physician;
    c.physician.t = c.t;
    if (!j.contains("automaton") || !j.at("automaton").is_string()) throw std::invalid_argument("physician needs 'automaton'");
    c.physician.automaton = j.at("automaton").get<std::string>();
    const std::string response = j.contains("response") && j.at("response").is_string() ? j.at("response").get<std::string>() : "";
    const auto k = parse_physician_kind(lower(response));
    if (!k) throw std::invalid_argument("'response' must be confirm, hold or jump");
    c.physician.kind = *k;
    if (*k != PhysicianEvent::Kind::Hold) {
      if (!j.contains("state") || !j.at("state").is_string()) throw std::invalid_argument(response + " needs 'state'");
      c.physician.state = j.at("state").get<std::string>();
    }
  } else if (kind == "tick") {
    c.kind = Command::Kind::Tick;
  } else {
    throw std::invalid_argument("'kind' must be snapshot, physician or tick");
  }
  return c;
}

std::vector<Command> parse_scenario(std::string_view text) {
  std::vector<Command> out;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Command c;
    try {
      c = parse_command(json::parse(line));
    } catch (const json::exception& e) {
      throw ScenarioError(line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(line_no, e.what());
    }
    c.line = line_no;
    if (!out.empty() && c.t < out.back().t) {
      throw ScenarioError(line_no, "timestamp " + std::to_string(c.t) + " precedes " + std::to_string(out.back().t));
    }
    out.push_back(std::move(c));
  }
  return out;
}

Runtime::Runtime(std::shared_ptr<const CompiledPack> pack)
    : pack_(pack), engine_(pack), guidance_(pack->source) {}

json& Runtime::append(Millis t, std::string_view kind) {
  json r;
  r["seq"] = log_.size();
  r["t"] = t;
  r["kind"] = kind;
  log_.push_back(std::move(r));
  return log_.back();
}

void Runtime::record(const std::vector<EngineEvent>& events) {
  for (const EngineEvent& e : events) {
    json& r = append(e.t, to_string(e.kind));
    switch (e.kind) {
      case EngineEvent::Kind::OrganStateChanged:
      case EngineEvent::Kind::BeliefChanged:
        r["automaton"] = e.automaton;
        r["from"] = e.from;
        r["to"] = e.to;
        break;
      case EngineEvent::Kind::Inconsistency:
        r["rule"] = e.rule;
        r["message"] = e.message;
        break;
      case EngineEvent::Kind::Emitted:
        r["automaton"] = e.automaton;
        r["event"] = e.event;
        if (e.payload) r["payload"] = value_to_json(*e.payload);
        break;
      case EngineEvent::Kind::PhysicianResponse:
        r["automaton"] = e.automaton;
        r["response"] = to_string(e.response);
        if (!e.state.empty()) r["state"] = e.state;
        r["applied"] = e.applied;
        break;
    }
  }
}

void Runtime::record(const std::vector<ProtocolAction>& actions) {
  for (const ProtocolAction& a : actions) {
    json& r = append(a.t, to_string(a.kind));
    switch (a.kind) {
      case ProtocolAction::Kind::Alert:
        r["automaton"] = a.automaton;
        r["stage"] = to_string(a.stage);
        r["counter"] = a.counter;
        break;
      case ProtocolAction::Kind::LogDeviation: {
        const json d = deviation_json(a.record);
        for (const auto& [k, v] : d.items()) {
          if (k != "t") r[k] = v;
        }
        break;
      }
      case ProtocolAction::Kind::ResetCounter:
        r["automaton"] = a.automaton;
        r["counter"] = a.counter;
        break;
      case ProtocolAction::Kind::DisplayGuidelines:
        r["state"] = a.state;
        r["guidelines"] = a.guidelines;
        break;
    }
  }
}

void Runtime::require_not_before(Millis t) const {
  if (t < now_) {
    throw EngineError(EngineError::Code::StaleTimestamp,
                      "timestamp " + std::to_string(t) + " precedes current time " + std::to_string(now_));
  }
}

void Runtime::evaluate(Millis t) {
  record(guidance_.evaluate(engine_.current_state(), engine_.current_belief(), t));
}

std::vector<json> Runtime::ingest(const Snapshot& snapshot) {
  require_not_before(snapshot.t);
  const std::size_t mark = log_.size();
  Engine engine_backup = engine_;
  BestPracticeManager guidance_backup = guidance_;
  try {
    record(guidance_.advance_to(snapshot.t));
    json values = json::object();
    for (const auto& [k, v] : snapshot.values) values[k] = value_to_json(v);
    append(snapshot.t, "Measurements")["values"] = std::move(values);
    record(engine_.ingest(snapshot));
    record(engine_.detect_inconsistencies(snapshot));
    evaluate(snapshot.t);
  } catch (...) {
    engine_ = std::move(engine_backup);
    guidance_ = std::move(guidance_backup);
    log_.resize(mark);
    throw;
  }
  now_ = snapshot.t;
  return {log_.begin() + static_cast<std::ptrdiff_t>(mark), log_.end()};
}

std::vector<json> Runtime::physician(const PhysicianEvent& event) {
  require_not_before(event.t);
  const std::size_t mark = log_.size();
  Engine engine_backup = engine_;
  BestPracticeManager guidance_backup = guidance_;
  try {
    record(guidance_.advance_to(event.t));
    record(engine_.apply_physician_event(event));
    evaluate(event.t);
  } catch (...) {
    engine_ = std::move(engine_backup);
    guidance_ = std::move(guidance_backup);
    log_.resize(mark);
    throw;
  }
  now_ = event.t;
  return {log_.begin() + static_cast<std::ptrdiff_t>(mark), log_.end()};
}

std::vector<json> Runtime::advance_to(Millis t) {
  require_not_before(t);
  const std::size_t mark = log_.size();
  record(guidance_.advance_to(t));
  engine_.advance_to(t);
  now_ = t;
  return {log_.begin() + static_cast<std::ptrdiff_t>(mark), log_.end()};
}

std::vector<json> Runtime::apply(const Command& c) {
  switch (c.kind) {
    case Command::Kind::Snapshot: return ingest(c.snapshot);
    case Command::Kind::Physician: return physician(c.physician);
    case Command::Kind::Tick: return advance_to(c.t);
  }
  return {};
}

std::string Runtime::log_text() const {
  std::string out;
  for (const json& r : log_) out += r.dump() + "\n";
  return out;
}

json Runtime::state() const {
  json j;
  j["t"] = now_;
  j["started"] = engine_.has_snapshot();
  const PatientState s = engine_.current_state();
  const PhysicianBelief b = engine_.current_belief();
  json names = json::array();
  json processes = json::array();
  for (std::size_t i = 0; i < pack_->size(); ++i) {
    const DivergenceProtocol& p = guidance_.process(i);
    names.push_back(pack_->organs[i].name);
    processes.push_back({{"automaton", pack_->organs[i].name},
                         {"organ", s[i]},
                         {"belief", b[i]},
                         {"phase", std::string(to_string(p.phase()))},
                         {"counter", p.counter()},
                         {"remaining", p.armed() ? json(p.remaining()) : json(nullptr)}});
  }
  j["automata"] = names;
  j["S"] = s;
  j["B"] = b;
  j["processes"] = processes;
  json inputs = json::object();
  for (const auto& [k, v] : engine_.inputs()) inputs[k] = value_to_json(v);
  j["inputs"] = inputs;
  j["guidelines"] = guidelines();
  return j;
}

json Runtime::guidelines() const {
  json j;
  const PatientState s = engine_.current_state();
  j["state"] = s;
  try {
    j["guidelines"] = guidance_.lookup_guidelines(s);
  } catch (const NoGuidelineError&) {
    j["guidelines"] = json::array();
  }
  j["displayed"] = guidance_.displayed() && *guidance_.displayed() == s;
  return j;
}

json Runtime::deviation_log() const {
  json out = json::array();
  for (const DeviationRecord& r : guidance_.deviation_log()) out.push_back(deviation_json(r));
  return out;
}

}  // namespace gsm::service
