#include "gsm/service/session.hpp"

#include "gsm/compile.hpp"

namespace gsm::service {

namespace {

ServiceError from_engine(const EngineError& e) {
  switch (e.code) {
    case EngineError::Code::StaleTimestamp: return {409, "stale_timestamp", e.what()};
    case EngineError::Code::IncompleteSnapshot: return {400, "incomplete_snapshot", e.what()};
    case EngineError::Code::UnknownName: return {400, "unknown_name", e.what()};
    case EngineError::Code::BadValue: return {400, "bad_value", e.what()};
    case EngineError::Code::NotStarted: return {409, "no_snapshot", e.what()};
  }
  return {500, "internal", e.what()};
}

Valuation params_from_json(const json& j) {
  if (!j.is_object()) throw ServiceError(400, "bad_request", "'params' must be an object");
  Valuation out;
  for (const auto& [k, v] : j.items()) {
    try {
      out[k] = value_from_json(v);
    } catch (const std::invalid_argument& e) {
      throw ServiceError(400, "bad_value", "parameter '" + k + "': " + e.what());
    }
  }
  return out;
}

json type_json(const TypeSpec& t) {
  json j;
  j["kind"] = std::string(to_string(t.kind));
  if (t.kind == ValueType::Enum) j["literals"] = t.literals;
  if (t.range) {
    j["range"] = {{"lo", value_to_json(t.range->lo)}, {"hi", value_to_json(t.range->hi)}, {"step", value_to_json(t.range->step)}};
  }
  return j;
}

}  // namespace

Session::Session(std::string id, std::shared_ptr<const CompiledPack> base, SessionOptions options)
    : id_(std::move(id)), base_(std::move(base)), options_(std::move(options)) {
  set_params(options_.params);
  if (options_.log_path) {
    log_file_.open(*options_.log_path, std::ios::out | std::ios::trunc);
    if (!log_file_) throw ServiceError(500, "log_unwritable", "cannot open log file " + options_.log_path->string());
  }
}

Session::~Session() { close(); }

void Session::set_params(const Valuation& overrides) {
  std::lock_guard lock(mutex_);
  if (started_) throw ServiceError(409, "already_started", "parameters are frozen once the session has started");
  Valuation merged = params_;
  for (const auto& [k, v] : overrides) merged[k] = v;
  std::shared_ptr<const CompiledPack> pack;
  try {
    pack = std::make_shared<CompiledPack>(compile(with_params(base_->source, merged)));
  } catch (const std::invalid_argument& e) {
    throw ServiceError(400, "bad_parameter", e.what());
  } catch (const CompileError& e) {
    throw ServiceError(400, "bad_parameter", e.what());
  }
  params_ = std::move(merged);
  runtime_ = std::make_unique<Runtime>(std::move(pack));
}

json Session::start() {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw ServiceError(410, "closed", "session is closed");
    if (started_) throw ServiceError(409, "already_started", "session already started");
    started_ = true;
    origin_ = std::chrono::steady_clock::now();
  }
  if (options_.clock == ClockMode::Wall) ticker_ = std::thread([this] { ticker(); });
  return info();
}

Millis Session::clock_now() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin_).count();
}

void Session::flush(std::size_t from) {
  if (log_file_) {
    const auto& log = runtime_->log();
    for (std::size_t i = from; i < log.size(); ++i) log_file_ << log[i].dump() << '\n';
    log_file_.flush();
  }
  changed_.notify_all();
}

json Session::run(const std::function<std::vector<json>(Runtime&, Millis)>& command, const json& body) {
  if (!body.is_object()) throw ServiceError(400, "bad_request", "expected a JSON object");
  std::lock_guard lock(mutex_);
  if (closed_) throw ServiceError(410, "closed", "session is closed");
  if (!started_) throw ServiceError(409, "not_started", "start the session first");
  Millis t;
  if (body.contains("t")) {
    if (!body.at("t").is_number_integer() || body.at("t").get<Millis>() < 0) {
      throw ServiceError(400, "bad_request", "'t' must be a non-negative integer");
    }
    t = body.at("t").get<Millis>();
  } else if (options_.clock == ClockMode::Wall) {
    t = std::max(clock_now(), runtime_->now());
  } else {
    throw ServiceError(400, "bad_request", "'t' is required with the virtual clock");
  }
  const std::size_t mark = runtime_->log().size();
  std::vector<json> records;
  try {
    records = command(*runtime_, t);
  } catch (const EngineError& e) {
    throw from_engine(e);
  } catch (const std::invalid_argument& e) {
    throw ServiceError(400, "bad_request", e.what());
  }
  flush(mark);
  return {{"accepted", true}, {"t", t}, {"events", records}};
}

json Session::measurements(const json& body) {
  if (!body.is_object() || !body.contains("values") || !body.at("values").is_object()) {
    throw ServiceError(400, "bad_request", "expected {\"t\": ms, \"values\": {...}}");
  }
  return run(
      [&](Runtime& rt, Millis t) {
        Snapshot s;
        s.t = t;
        for (const auto& [k, v] : body.at("values").items()) s.values[k] = value_from_json(v);
        return rt.ingest(s);
      },
      body);
}

json Session::physician(const json& body) {
  return run(
      [&](Runtime& rt, Millis t) {
        json full = body;
        full["t"] = t;
        full["kind"] = "physician";
        return rt.physician(parse_command(full).physician);
      },
      body);
}

json Session::tick(const json& body) {
  if (options_.clock == ClockMode::Wall) throw ServiceError(409, "wall_clock", "time advances by itself in wall-clock mode");
  return run([](Runtime& rt, Millis t) { return rt.advance_to(t); }, body);
}

json Session::state() const {
  std::lock_guard lock(mutex_);
  json j = runtime_->state();
  j["id"] = id_;
  j["session_started"] = started_;
  return j;
}

json Session::guidelines() const {
  std::lock_guard lock(mutex_);
  return runtime_->guidelines();
}

json Session::deviations() const {
  std::lock_guard lock(mutex_);
  return runtime_->deviation_log();
}

std::string Session::log_text() const {
  std::lock_guard lock(mutex_);
  return runtime_->log_text();
}

json Session::info() const {
  std::lock_guard lock(mutex_);
  json params = json::object();
  for (const auto& [k, v] : runtime_->pack().params) params[k] = value_to_json(v);
  return {{"id", id_},
          {"started", started_},
          {"closed", closed_},
          {"clock", options_.clock == ClockMode::Wall ? "wall" : "virtual"},
          {"params", params},
          {"records", runtime_->log().size()}};
}

std::vector<json> Session::records_from(std::size_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  changed_.wait_for(lock, timeout, [&] { return closed_ || runtime_->log().size() > from; });
  const auto& log = runtime_->log();
  if (from >= log.size()) return {};
  return {log.begin() + static_cast<std::ptrdiff_t>(from), log.end()};
}

void Session::close() {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    closed_ = true;
  }
  changed_.notify_all();
  if (ticker_.joinable()) ticker_.join();
}

bool Session::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

void Session::ticker() {
  std::unique_lock lock(mutex_);
  while (!closed_) {
    changed_.wait_for(lock, options_.tick_interval, [&] { return closed_; });
    if (closed_) break;
    const Millis now = clock_now();
    if (now <= runtime_->now()) continue;
    const std::size_t mark = runtime_->log().size();
    runtime_->advance_to(now);
    if (runtime_->log().size() > mark) flush(mark);
  }
}

SessionManager::SessionManager(std::shared_ptr<const CompiledPack> pack, std::optional<std::filesystem::path> log_dir)
    : pack_(std::move(pack)), log_dir_(std::move(log_dir)) {}

SessionManager::~SessionManager() { close_all(); }

std::shared_ptr<Session> SessionManager::create(const json& body) {
  if (!body.is_object()) throw ServiceError(400, "bad_request", "expected a JSON object");
  SessionOptions options;
  if (body.contains("params")) options.params = params_from_json(body.at("params"));
  if (body.contains("clock")) {
    const json& c = body.at("clock");
    if (c == "wall") options.clock = ClockMode::Wall;
    else if (c != "virtual") throw ServiceError(400, "bad_request", "'clock' must be virtual or wall");
  }
  std::lock_guard lock(mutex_);
  const std::string id = "s" + std::to_string(next_);
  if (log_dir_) options.log_path = *log_dir_ / (id + ".jsonl");
  auto session = std::make_shared<Session>(id, pack_, std::move(options));
  ++next_;
  sessions_[id] = session;
  return session;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "no session '" + id + "'");
  return it->second;
}

json SessionManager::list() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  json out = json::array();
  for (const auto& s : all) out.push_back(s->info());
  return out;
}

json SessionManager::describe() const {
  const ModelPack& p = pack_->source;
  json automata = json::array();
  for (const Automaton& a : p.automata) {
    json states = json::array();
    for (const State& s : a.states) states.push_back({{"name", s.name}, {"aliases", s.aliases}});
    json inputs = json::array();
    for (const InputDecl& in : a.inputs) inputs.push_back({{"name", in.name}, {"unit", in.unit}, {"type", type_json(in.type)}});
    automata.push_back({{"name", a.name}, {"initial", a.initial}, {"states", states}, {"inputs", inputs}});
  }
  json params = json::array();
  for (const Param& prm : p.params) {
    params.push_back({{"name", prm.name}, {"type", type_json(prm.type)}, {"value", value_to_json(prm.value)}});
  }
  return {{"name", p.name},
          {"automata", automata},
          {"params", params},
          {"protocol", {{"t_short", p.protocol.t_short}, {"t_long", p.protocol.t_long}}}};
}

void SessionManager::close_all() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  for (const auto& s : all) s->close();
}

}  // namespace gsm::service
