#include <doctest.h>

#include <atomic>
#include <thread>

#include <unistd.h>

#include <httplib.h>

#include "experiments.hpp"
#include "gsm/cardiac.hpp"
#include "gsm/service/http.hpp"

using namespace gsm;
using namespace gsm::service;
using gsm::testing::read_text;
using gsm::testing::source_dir;

namespace {

std::string scenario_text(const std::string& name) {
  return read_text(source_dir() / "models" / "scenarios" / (name + ".jsonl"));
}

const json kNormal = {{"rhythm", "SINUS"}, {"sbp", 120},         {"hr", 80},        {"ph", 7.40},
                      {"paco2", 40},       {"urine_output", 60}, {"creatinine", 1.0}, {"potassium", 4.2}};

/// Service on a free local port for the lifetime of the fixture.
struct Server {
  SessionManager sessions{load_cardiac_pack()};
  HttpService http{sessions};
  int port = -1;
  std::thread thread;

  Server() {
    port = http.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { http.listen(); });
  }
  ~Server() {
    sessions.close_all();
    http.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(5, 0);
    return c;
  }
};

json post(httplib::Client& c, const std::string& path, const json& body, int status = 200) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == status);
  return json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, int status = 200) {
  auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == status);
  return json::parse(res->body);
}

std::string started_session(httplib::Client& c, const json& create = json::object()) {
  const json info = post(c, "/sessions", create, 201);
  const std::string id = info.at("id");
  post(c, "/sessions/" + id + "/start", json::object());
  return id;
}

/// Reads SSE frames until `count` have arrived; returns their data payloads.
std::vector<json> read_events(const Server& s, const std::string& path, std::size_t count,
                              const httplib::Headers& headers = {}) {
  auto c = s.client();
  std::vector<json> out;
  std::string buffer;
  c.Get(path, headers, [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
      const std::string frame = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      const auto d = frame.find("data: ");
      if (d == std::string::npos) continue;
      json rec = json::parse(frame.substr(d + 6));
      CHECK(frame.rfind("id: " + std::to_string(rec.at("seq").get<int>()) + "\nevent: " + rec.at("kind").get<std::string>(), 0) == 0);
      out.push_back(std::move(rec));
    }
    return out.size() < count;
  });
  return out;
}

}  // namespace

TEST_CASE("scenario files") {
  SUBCASE("shipped scenarios parse") {
    for (const char* name : {"acidosis_hold", "confirm_all", "convergence", "pea_with_pressure"}) {
      CAPTURE(name);
      CHECK_FALSE(parse_scenario(scenario_text(name)).empty());
    }
    const auto cmds = parse_scenario(scenario_text("convergence"));
    CHECK(cmds[1].kind == Command::Kind::Physician);
    CHECK(cmds[1].physician.kind == PhysicianEvent::Kind::Confirm);
    CHECK(cmds[1].line == 2);
    CHECK(cmds.back().kind == Command::Kind::Tick);
  }
  SUBCASE("errors name the line") {
    auto line_of = [](const std::string& text) {
      try {
        parse_scenario(text);
      } catch (const ScenarioError& e) {
        return e.line;
      }
      return 0;
    };
    const std::string ok = R"({"t": 0, "kind": "tick"})";
    CHECK(line_of(ok + "\n\n{not json}\n") == 3);
    CHECK(line_of(ok + "\n" + R"({"t": 5, "kind": "nap"})") == 2);
    CHECK(line_of(ok + "\n" + R"({"kind": "tick"})") == 2);
    CHECK(line_of(ok + "\n" + R"({"t": 5, "kind": "physician", "automaton": "BGI", "response": "jump"})") == 2);
    CHECK(line_of(R"({"t": 10, "kind": "tick"})" "\n" R"({"t": 5, "kind": "tick"})") == 2);
    CHECK(line_of(R"({"t": -1, "kind": "tick"})") == 1);
  }
}

TEST_CASE("replays match the reviewed logs") {
  const auto pack = load_cardiac_pack();
  for (const char* name : {"acidosis_hold", "confirm_all"}) {
    CAPTURE(name);
    const std::string golden = read_text(source_dir() / "tests" / "golden" / (std::string(name) + ".jsonl"));
    const std::string first = testing::replay(pack, scenario_text(name)).log_text();
    CHECK(first == golden);
    CHECK(testing::replay(pack, scenario_text(name)).log_text() == first);
  }
}

TEST_CASE("acidosis hold log") {
  const Runtime rt = testing::replay(load_cardiac_pack(), scenario_text("acidosis_hold"));
  std::vector<json> bgi;
  for (const auto& r : rt.log()) {
    if (r.at("kind") == "Alert" && r.at("automaton") == "BGI" && r.at("t") > 2000) bgi.push_back(r);
  }
  REQUIRE(bgi.size() == 3);
  CHECK(bgi[0].at("stage") == "First");
  CHECK(bgi[1].at("stage") == "Second");
  CHECK(bgi[2].at("stage") == "Final");
  CHECK(bgi[2].at("counter") == 3);
  CHECK(bgi[1].at("t").get<Millis>() - bgi[0].at("t").get<Millis>() == 30000);
  CHECK(bgi[2].at("t").get<Millis>() - bgi[1].at("t").get<Millis>() == 120000);

  const json st = rt.state();
  CHECK(st.at("S")[1] == "MetabolicAcidosis");
  CHECK(st.at("B")[1] == "NormalBloodGasLevels");
  CHECK(st.at("processes")[1].at("phase") == "DivergedFinal");
  CHECK(st.at("processes")[1].at("remaining").is_null());

  // Every record has a gapless sequence number and a non-decreasing time.
  for (std::size_t i = 0; i < rt.log().size(); ++i) {
    CHECK(rt.log()[i].at("seq") == i);
    if (i) CHECK(rt.log()[i].at("t") >= rt.log()[i - 1].at("t"));
  }
  const json devs = rt.deviation_log();
  CHECK(devs.size() == 6);
  CHECK(devs.back().at("organ_state") == "MetabolicAcidosis");
  CHECK(devs.back().at("belief") == "NormalBloodGasLevels");
}

TEST_CASE("runtime errors leave the session unchanged") {
  Runtime rt(load_cardiac_pack());
  CHECK_THROWS_AS(rt.physician(PhysicianEvent{0, "BGI", PhysicianEvent::Kind::Hold, ""}), EngineError);
  CHECK(rt.log().empty());
  for (const auto& c : parse_scenario(R"({"t": 0, "kind": "snapshot", "values": {"rhythm": "SINUS", "sbp": 120, "hr": 80, "ph": 7.4, "paco2": 40, "urine_output": 60, "creatinine": 1.0, "potassium": 4.2}})")) {
    rt.apply(c);
  }
  const std::size_t n = rt.log().size();
  const json before = rt.state();
  CHECK_THROWS_AS(rt.ingest(Snapshot{0, {}}), EngineError);
  CHECK_THROWS_AS(rt.ingest(Snapshot{10, {{"ph", Value::enumerator("LOW")}}}), EngineError);
  CHECK_THROWS_AS(rt.advance_to(-5), EngineError);
  CHECK(rt.log().size() == n);
  CHECK(rt.state() == before);
}

TEST_CASE("values to and from JSON") {
  CHECK(value_from_json(json(20)) == Value::integer(20));
  CHECK(value_from_json(json(7.35)) == Value::decimal(*Decimal::parse("7.35")));
  CHECK(value_from_json(json("7.35")) == Value::decimal(*Decimal::parse("7.35")));
  CHECK(value_from_json(json("VFIB")) == Value::enumerator("VFIB"));
  CHECK_THROWS_AS(value_from_json(json::array()), std::invalid_argument);
  CHECK(value_to_json(Value::integer(3)) == json(3));
  CHECK(value_to_json(Value::enumerator("PEA")) == json("PEA"));
}

TEST_CASE("session log file mirrors the log") {
  const auto dir = std::filesystem::temp_directory_path() / ("gsm_logs_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  {
    SessionManager m(load_cardiac_pack(), dir);
    auto s = m.create(json::object());
    s->start();
    s->measurements({{"t", 0}, {"values", kNormal}});
    s->physician({{"t", 10}, {"automaton", "BGI"}, {"response", "confirm"}, {"state", "NormalBloodGasLevels"}});
    CHECK(read_text(dir / (s->id() + ".jsonl")) == s->log_text());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("HTTP surface") {
  Server server;
  auto c = server.client();

  SUBCASE("pack summary") {
    const json p = get(c, "/pack");
    CHECK(p.at("name") == "CardiacArrest");
    REQUIRE(p.at("automata").size() == 3);
    CHECK(p.at("automata")[0].at("states")[3].at("aliases")[0] == "VentricularFibrillation");
    CHECK(p.at("automata")[1].at("inputs")[0].at("type").at("kind") == "decimal");
    CHECK(p.at("protocol").at("t_short") == 30000);
  }

  SUBCASE("a session end to end") {
    const std::string id = started_session(c);
    const std::string base = "/sessions/" + id;
    json r = post(c, base + "/measurements", {{"t", 0}, {"values", kNormal}});
    CHECK(r.at("accepted") == true);
    CHECK_FALSE(r.at("events").empty());
    // Confirming the suggested states makes everything converge.
    const json st = get(c, base + "/state");
    for (std::size_t i = 0; i < 3; ++i) {
      post(c, base + "/physician",
           {{"t", 2000}, {"automaton", st.at("automata")[i]}, {"response", "confirm"}, {"state", st.at("S")[i]}});
    }
    const json g = get(c, base + "/guidelines");
    CHECK(g.at("displayed") == true);
    CHECK(g.at("guidelines")[0] == "Monitor; reassess rhythm, blood gas and renal function");

    post(c, base + "/measurements", {{"t", 30000}, {"values", {{"ph", 7.2}}}});
    post(c, base + "/tick", {{"t", 60000}});
    const json after = get(c, base + "/state");
    CHECK(after.at("processes")[1].at("phase") == "Diverged2");
    CHECK(after.at("processes")[1].at("counter") == 2);
    CHECK(after.at("processes")[1].at("remaining") == 120000);
    const json devs = get(c, base + "/log");
    CHECK(devs.at("deviations").size() >= 2);

    auto text = c.Get(base + "/log?format=jsonl");
    REQUIRE(text);
    CHECK(text->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(text->body == server.sessions.find(id)->log_text());

    const json list = get(c, "/sessions");
    CHECK(list.size() == 1);
    CHECK(list[0].at("id") == id);
    CHECK(list[0].at("started") == true);
  }

  SUBCASE("parameters are set before start and frozen after") {
    const json info = post(c, "/sessions", {{"params", {{"SBP_PULSE_MIN", 25}}}}, 201);
    const std::string base = "/sessions/" + info.at("id").get<std::string>();
    CHECK(info.at("params").at("SBP_PULSE_MIN") == 25);
    auto put = c.Put(base + "/params", json{{"params", {{"HR_MIN", 45}}}}.dump(), "application/json");
    REQUIRE(put);
    CHECK(put->status == 200);
    CHECK(json::parse(put->body).at("params").at("HR_MIN") == 45);
    put = c.Put(base + "/params", json{{"params", {{"NOPE", 1}}}}.dump(), "application/json");
    REQUIRE(put);
    CHECK(put->status == 400);

    post(c, base + "/start", json::object());
    put = c.Put(base + "/params", json{{"params", {{"HR_MIN", 50}}}}.dump(), "application/json");
    REQUIRE(put);
    CHECK(put->status == 409);
    CHECK(json::parse(put->body).at("error").at("code") == "already_started");

    post(c, base + "/measurements", {{"t", 0}, {"values", kNormal}});
    post(c, base + "/measurements", {{"t", 1000}, {"values", {{"rhythm", "PEA_WAVE"}, {"sbp", 22}, {"hr", 0}}}});
    CHECK(get(c, base + "/state").at("S")[0] == "PEA");
  }

  SUBCASE("errors") {
    CHECK(get(c, "/sessions/s99/state", 404).at("error").at("code") == "unknown_session");
    const json info = post(c, "/sessions", json::object(), 201);
    const std::string base = "/sessions/" + info.at("id").get<std::string>();
    CHECK(post(c, base + "/measurements", {{"t", 0}, {"values", kNormal}}, 409).at("error").at("code") == "not_started");
    post(c, base + "/start", json::object());
    CHECK(post(c, base + "/start", json::object(), 409).at("error").at("code") == "already_started");
    CHECK(post(c, base + "/physician", {{"t", 0}, {"automaton", "BGI"}, {"response", "hold"}}, 409).at("error").at("code") ==
          "no_snapshot");
    CHECK(post(c, base + "/measurements", {{"t", 0}, {"values", {{"ph", 7.4}}}}, 400).at("error").at("code") ==
          "incomplete_snapshot");
    post(c, base + "/measurements", {{"t", 5}, {"values", kNormal}});
    CHECK(post(c, base + "/measurements", {{"t", 5}, {"values", kNormal}}, 409).at("error").at("code") == "stale_timestamp");
    CHECK(post(c, base + "/measurements", {{"t", 6}, {"values", {{"lactate", 2}}}}, 400).at("error").at("code") ==
          "unknown_name");
    CHECK(post(c, base + "/measurements", {{"values", kNormal}}, 400).at("error").at("code") == "bad_request");
    CHECK(post(c, base + "/physician", {{"t", 6}, {"automaton", "BGI"}, {"response", "maybe"}}, 400).at("error").at("code") ==
          "bad_request");
    CHECK(post(c, base + "/tick", {{"t", 1}}, 409).at("error").at("code") == "stale_timestamp");
    CHECK(post(c, "/sessions", {{"clock", "sundial"}}, 400).at("error").at("code") == "bad_request");
    auto bad = c.Post(base + "/tick", "{oops", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).at("error").at("code") == "bad_json");
  }
}

TEST_CASE("event stream") {
  Server server;
  auto c = server.client();
  const std::string id = started_session(c);
  const std::string base = "/sessions/" + id;
  post(c, base + "/measurements", {{"t", 0}, {"values", kNormal}});
  post(c, base + "/measurements", {{"t", 1000}, {"values", {{"ph", 7.1}}}});
  const std::vector<json> log = [&] {
    std::vector<json> out;
    std::istringstream in(server.sessions.find(id)->log_text());
    for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
    return out;
  }();
  REQUIRE(log.size() > 5);

  SUBCASE("replays the log in order") {
    const auto events = read_events(server, base + "/events", log.size());
    CHECK(events == log);
  }
  SUBCASE("resumes after Last-Event-ID or ?from") {
    const auto resumed = read_events(server, base + "/events", log.size() - 4, {{"Last-Event-ID", "3"}});
    REQUIRE_FALSE(resumed.empty());
    CHECK(resumed.front().at("seq") == 4);
    CHECK(resumed.back() == log.back());
    const auto from = read_events(server, base + "/events?from=2", 1);
    REQUIRE_FALSE(from.empty());
    CHECK(from[0].at("seq") == 2);
  }
  SUBCASE("delivers new records live") {
    std::vector<json> live;
    std::thread reader([&] { live = read_events(server, base + "/events?from=" + std::to_string(log.size()), 1); });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    post(c, base + "/physician", {{"t", 2000}, {"automaton", "BGI"}, {"response", "hold"}});
    reader.join();
    REQUIRE(live.size() == 1);
    CHECK(live[0].at("seq") == log.size());
    CHECK(live[0].at("kind") == "PhysicianResponse");
  }
  SUBCASE("a bad resume position is rejected") {
    auto res = c.Get(base + "/events?from=abc");
    REQUIRE(res);
    CHECK(res->status == 400);
  }
}

TEST_CASE("concurrent requests are serialized") {
  Server server;
  auto c = server.client();
  const std::string id = started_session(c);
  const std::string base = "/sessions/" + id;
  post(c, base + "/measurements", {{"t", 0}, {"values", kNormal}});
  const std::size_t before = server.sessions.find(id)->info().at("records");

  std::atomic<int> accepted{0}, stale{0}, other{0};
  std::vector<std::thread> threads;
  for (int w = 0; w < 8; ++w) {
    threads.emplace_back([&, w] {
      auto cl = server.client();
      for (int i = 0; i < 15; ++i) {
        const json body = {{"t", 1 + w * 100 + i}, {"values", {{"hr", 80 + 5 * (i % 3)}}}};
        auto res = cl.Post(base + "/measurements", body.dump(), "application/json");
        if (res && res->status == 200) ++accepted;
        else if (res && res->status == 409) ++stale;
        else ++other;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(other == 0);
  CHECK(accepted + stale == 120);
  CHECK(accepted > 0);

  // One total order: gapless sequence numbers, strictly increasing snapshot times.
  std::istringstream in(server.sessions.find(id)->log_text());
  std::size_t seq = 0, measurements = 0;
  Millis last = -1;
  for (std::string line; std::getline(in, line); ++seq) {
    const json r = json::parse(line);
    CHECK(r.at("seq") == seq);
    if (r.at("kind") == "Measurements" && seq >= before) {
      ++measurements;
      CHECK(r.at("t").get<Millis>() > last);
      last = r.at("t");
    }
  }
  CHECK(measurements == static_cast<std::size_t>(accepted.load()));
}
