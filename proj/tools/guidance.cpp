// guidance: lint, verify, replay and serve model packs.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gsm/cardiac.hpp"
#include "gsm/checker/suite.hpp"
#include "gsm/parser.hpp"
#include "gsm/service/http.hpp"
#include "gsm/service/runtime.hpp"
#include "gsm/validate.hpp"

namespace {

using gsm::service::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

gsm::Value parse_literal(const std::string& text) {
  if (auto d = gsm::Decimal::parse(text)) {
    if (text.find('.') == std::string::npos) return gsm::Value::integer(d->micros() / gsm::Decimal::kScale);
    return gsm::Value::decimal(*d);
  }
  return gsm::Value::enumerator(text);
}

gsm::Valuation parse_params(const std::vector<std::string>& items) {
  gsm::Valuation out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected NAME=VALUE, got '" + item + "'");
    out[item.substr(0, eq)] = parse_literal(item.substr(eq + 1));
  }
  return out;
}

/// Empty path: the built-in cardiac arrest pack.
std::shared_ptr<const gsm::CompiledPack> load_pack(const std::string& path, const std::vector<std::string>& params) {
  const std::string text = path.empty() ? std::string(gsm::cardiac_pack_source()) : read_file(path);
  gsm::ParseResult parsed = gsm::parse_model(text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) std::cerr << d.format(path.empty() ? "<builtin>" : path) << "\n";
    throw std::runtime_error("model does not parse");
  }
  gsm::ModelPack pack = gsm::with_params(std::move(*parsed.pack), parse_params(params));
  try {
    return std::make_shared<gsm::CompiledPack>(gsm::compile(pack));
  } catch (const gsm::CompileError& e) {
    for (const auto& d : e.diagnostics) {
      if (d.severity == gsm::Severity::Error) std::cerr << d.format(path) << "\n";
    }
    throw;
  }
}

int lint(const std::string& path) {
  const std::string text = read_file(path);
  gsm::ParseResult parsed = gsm::parse_model(text);
  gsm::Diagnostics diags = parsed.diagnostics;
  if (parsed.ok()) diags = gsm::validate(*parsed.pack);
  for (const auto& d : diags) std::cout << d.format(path) << "\n";
  std::cerr << gsm::count(diags, gsm::Severity::Error) << " error(s), " << gsm::count(diags, gsm::Severity::Warning)
            << " warning(s), " << gsm::count(diags, gsm::Severity::Info) << " info\n";
  return gsm::has_errors(diags) ? 1 : 0;
}

struct VerifyArgs {
  std::string model;
  std::string props;
  std::size_t node_cap = 5'000'000;
  int counter_cap = 4;
  std::string stutter = "auto";
  bool full_domains = false;
  std::string json_out;
  std::vector<std::string> params;
};

int verify(const VerifyArgs& a) {
  const auto pack = load_pack(a.model, a.params);
  const std::string props = a.props.empty() ? std::string(gsm::cardiac_properties()) : read_file(a.props);

  gsm::checker::SpaceOptions so;
  so.node_cap = a.node_cap;
  so.counter_cap = a.counter_cap;
  so.full_domains = a.full_domains;
  gsm::checker::CheckOptions co;
  co.stutter = a.stutter == "on" ? gsm::checker::StutterMode::On
               : a.stutter == "off" ? gsm::checker::StutterMode::Off
                                    : gsm::checker::StutterMode::Auto;

  const auto t0 = std::chrono::steady_clock::now();
  const gsm::checker::StateSpace space = gsm::checker::build_state_space(pack, so);
  const auto t1 = std::chrono::steady_clock::now();
  const gsm::checker::SuiteReport report = gsm::checker::check_suite(space, props, co);
  const auto t2 = std::chrono::steady_clock::now();
  auto ms = [](auto d) { return std::chrono::duration<double, std::milli>(d).count(); };

  std::cout << "model " << report.model << ": " << space.components.size() << " component(s), " << report.nodes
            << " nodes, " << report.edges << " edges (" << std::fixed << std::setprecision(1) << ms(t1 - t0) << " ms)\n";
  for (const auto& v : report.verdicts) {
    std::cout << std::left << std::setw(6) << v.id << std::setw(10) << (v.effective() ? "satisfied" : "violated");
    if (v.invariant_reading) {
      std::cout << " [A[] reading; A<> " << (v.satisfied ? "satisfied" : "violated") << "]";
    }
    std::cout << "  " << v.formula << "  (" << v.method << ", " << v.nodes_visited << " nodes, " << v.time_ms << " ms)\n";
    const gsm::checker::Trace& trace = v.invariant_reading ? v.invariant_reading->trace : v.trace;
    if (!trace.steps.empty()) {
      const bool counterexample = !v.effective();
      std::cout << "      " << (counterexample ? "counterexample:" : "witness:");
      for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        if (trace.loop_start && *trace.loop_start == i) std::cout << " [loop]";
        std::cout << " " << trace.steps[i].str() << (i + 1 < trace.steps.size() ? ";" : "");
      }
      std::cout << "\n";
    }
  }
  for (const auto& e : report.errors) {
    std::cout << (a.props.empty() ? "<builtin>" : a.props) << ":" << e.line << ":" << e.column << ": error: " << e.message
              << "\n";
  }
  std::cout << (report.all_satisfied() ? "all properties satisfied" : "some properties failed") << " (" << ms(t2 - t0)
            << " ms total)\n";
  if (!a.json_out.empty()) {
    std::ofstream out(a.json_out);
    out << gsm::checker::to_json(report, space).dump(2) << "\n";
  }
  return report.all_satisfied() ? 0 : 1;
}

struct RunArgs {
  std::string model;
  std::string scenario;
  double speed = 0;
  std::string log;
  std::string state;
  std::vector<std::string> params;
};

int run(const RunArgs& a) {
  const auto pack = load_pack(a.model, a.params);
  const auto commands = gsm::service::parse_scenario(read_file(a.scenario));
  gsm::service::Runtime rt(pack);

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::binary | std::ios::trunc);
    if (!log_file) throw std::runtime_error("cannot write " + a.log);
  }
  std::ostream& log = a.log.empty() ? std::cout : log_file;

  gsm::Millis prev = 0;
  for (const auto& c : commands) {
    if (a.speed > 0 && c.t > prev) {
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(static_cast<double>(c.t - prev) / a.speed));
    }
    prev = c.t;
    std::vector<json> records;
    try {
      records = rt.apply(c);
    } catch (const std::exception& e) {
      throw std::runtime_error(a.scenario + ":" + std::to_string(c.line) + ": " + e.what());
    }
    for (const auto& r : records) log << r.dump() << "\n";
    log.flush();
  }
  const std::string final_state = rt.state().dump(2);
  if (!a.state.empty()) {
    std::ofstream out(a.state);
    out << final_state << "\n";
  } else {
    std::cerr << final_state << "\n";
  }
  return 0;
}

gsm::service::HttpService* g_service = nullptr;

int serve(const std::string& model, const std::vector<std::string>& params, const std::string& host, int port,
          const std::string& log_dir) {
  const auto pack = load_pack(model, params);
  std::optional<std::filesystem::path> dir;
  if (!log_dir.empty()) {
    std::filesystem::create_directories(log_dir);
    dir = log_dir;
  }
  gsm::service::SessionManager sessions(pack, dir);
  gsm::service::HttpService service(sessions);
  const int bound = service.bind(host, port);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  std::cout << "serving " << pack->source.name << " on http://" << host << ":" << bound << std::endl;
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  service.listen();
  g_service = nullptr;
  sessions.close_all();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clinical guidance state machines: lint, verify, replay, serve"};
  app.require_subcommand(1);

  std::string lint_path;
  auto* lint_cmd = app.add_subcommand("lint", "Validate a .gsm pack and print diagnostics");
  lint_cmd->add_option("pack", lint_path, "Pack file")->required()->check(CLI::ExistingFile);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Check a property file against a pack");
  verify_cmd->add_option("--model", va.model, "Pack file (default: built-in cardiac arrest pack)")->check(CLI::ExistingFile);
  verify_cmd->add_option("--props", va.props, "Property file (default: built-in cardiac properties)")->check(CLI::ExistingFile);
  verify_cmd->add_option("--node-cap", va.node_cap, "Largest state space built");
  verify_cmd->add_option("--counter-cap", va.counter_cap, "Deviation counters saturate here");
  verify_cmd->add_option("--stutter", va.stutter, "Implicit stutter: on, off or auto")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  verify_cmd->add_flag("--full-domains", va.full_domains, "Ignore the discretization block");
  verify_cmd->add_option("--json", va.json_out, "Write the JSON report here");
  verify_cmd->add_option("--param", va.params, "Parameter override NAME=VALUE");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Replay a scenario and print the event log");
  run_cmd->add_option("--model", ra.model, "Pack file (default: built-in cardiac arrest pack)")->check(CLI::ExistingFile);
  run_cmd->add_option("--scenario", ra.scenario, "Scenario file (JSON Lines)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--speed", ra.speed, "Wall-clock pacing factor; 0 runs as fast as possible")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--log", ra.log, "Write the event log here instead of stdout");
  run_cmd->add_option("--state", ra.state, "Write the final state here instead of stderr");
  run_cmd->add_option("--param", ra.params, "Parameter override NAME=VALUE");

  std::string serve_model, host = "127.0.0.1", log_dir;
  int port = 8080;
  std::vector<std::string> serve_params;
  auto* serve_cmd = app.add_subcommand("serve", "Run the session server");
  serve_cmd->add_option("--model", serve_model, "Pack file (default: built-in cardiac arrest pack)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--port", port, "Listen port (0 picks one)");
  serve_cmd->add_option("--log-dir", log_dir, "Write each session's event log here");
  serve_cmd->add_option("--param", serve_params, "Default parameter override NAME=VALUE");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*lint_cmd) return lint(lint_path);
    if (*verify_cmd) return verify(va);
    if (*run_cmd) return run(ra);
    if (*serve_cmd) return serve(serve_model, serve_params, host, port, log_dir);
  } catch (const gsm::checker::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
