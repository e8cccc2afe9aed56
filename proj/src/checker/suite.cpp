#include "gsm/checker/suite.hpp"

#include <algorithm>
#include <cctype>

namespace gsm::checker {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

PropertyFile parse_property_file(std::string_view text) {
  PropertyFile out;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto colon = line.find(':');
    const std::string_view id = colon == std::string_view::npos ? std::string_view{} : trim(line.substr(0, colon));
    if (!is_identifier(id)) {
      out.errors.push_back({"", line_no, 1, "expected 'id: formula'"});
      continue;
    }
    const std::string_view rest = line.substr(colon + 1);
    const std::string_view formula = trim(rest);
    if (formula.empty()) {
      out.errors.push_back({std::string(id), line_no, static_cast<int>(colon) + 2, "missing formula"});
      continue;
    }
    const bool dup = std::any_of(out.entries.begin(), out.entries.end(), [&](const SuiteEntry& e) { return e.id == id; });
    if (dup) {
      out.errors.push_back({std::string(id), line_no, 1, "duplicate property id '" + std::string(id) + "'"});
      continue;
    }
    const auto column = static_cast<int>(colon + 1 + rest.find(formula.front())) + 1;
    out.entries.push_back({std::string(id), std::string(formula), line_no, column});
  }
  return out;
}

bool SuiteReport::all_satisfied() const {
  return errors.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.effective(); });
}

SuiteReport check_suite(const StateSpace& space, std::string_view property_file, const CheckOptions& options) {
  SuiteReport report;
  report.model = space.pack->source.name;
  report.nodes = space.total_nodes();
  report.edges = space.total_edges();
  PropertyFile file = parse_property_file(property_file);
  report.errors = std::move(file.errors);
  for (const SuiteEntry& entry : file.entries) {
    try {
      const PropertyAst ast = compile_property(entry.formula, *space.pack);
      Verdict v = check(space, ast, options);
      v.id = entry.id;
      report.verdicts.push_back(std::move(v));
    } catch (const PropertyError& e) {
      report.errors.push_back({entry.id, entry.line, entry.column + e.pos.column - 1, e.what()});
    } catch (const std::exception& e) {
      report.errors.push_back({entry.id, entry.line, 0, e.what()});
    }
  }
  std::stable_sort(report.errors.begin(), report.errors.end(),
                   [](const SuiteError& a, const SuiteError& b) { return a.line < b.line; });
  return report;
}

nlohmann::json to_json(const Trace& trace) {
  nlohmann::json j = nlohmann::json::object();
  j["steps"] = trace.labels();
  j["loop_start"] = trace.loop_start ? nlohmann::json(*trace.loop_start) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["id"] = v.id;
  j["formula"] = v.formula;
  j["quantifier"] = std::string(to_string(v.quantifier));
  j["result"] = v.satisfied ? "satisfied" : "violated";
  j["method"] = v.method;
  j["nodes_visited"] = v.nodes_visited;
  j["trace"] = to_json(v.trace);
  if (v.invariant_reading) {
    const auto& r = *v.invariant_reading;
    j["invariant_reading"] = {{"quantifier", "A[]"},
                              {"result", r.satisfied ? "satisfied" : "violated"},
                              {"method", r.method},
                              {"nodes_visited", r.nodes_visited},
                              {"trace", to_json(r.trace)}};
  }
  j["effective"] = v.effective() ? "satisfied" : "violated";
  j["time_ms"] = v.time_ms;
  return j;
}

nlohmann::json to_json(const SuiteReport& report, const StateSpace& space, bool timings) {
  nlohmann::json j;
  j["model"] = report.model;
  nlohmann::json comps = nlohmann::json::array();
  for (const Component& c : space.components) {
    nlohmann::json names = nlohmann::json::array();
    for (std::size_t p : c.processes) names.push_back(space.pack->organs[p].name);
    comps.push_back({{"processes", names}, {"nodes", c.nodes.size()}, {"edges", c.edge_count}});
  }
  j["space"] = {{"nodes", report.nodes}, {"edges", report.edges}, {"components", comps}};
  j["properties"] = nlohmann::json::array();
  for (const Verdict& v : report.verdicts) {
    nlohmann::json pv = to_json(v);
    if (!timings) pv.erase("time_ms");
    j["properties"].push_back(std::move(pv));
  }
  j["errors"] = nlohmann::json::array();
  for (const SuiteError& e : report.errors) {
    j["errors"].push_back({{"id", e.id}, {"line", e.line}, {"column", e.column}, {"message", e.message}});
  }
  j["all_satisfied"] = report.all_satisfied();
  return j;
}

}  // namespace gsm::checker
