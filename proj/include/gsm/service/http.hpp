#pragma once

#include <memory>
#include <string>

#include "gsm/service/session.hpp"

namespace gsm::service {

/// HTTP surface over a SessionManager.
///
///   GET  /pack                          pack summary
///   GET  /sessions                      session list
///   POST /sessions                      {"params": {...}, "clock": "virtual"|"wall"} -> info
///   PUT  /sessions/{id}/params          {"params": {...}} (before start only)
///   POST /sessions/{id}/start
///   POST /sessions/{id}/measurements    {"t": ms, "values": {...}}
///   POST /sessions/{id}/physician       {"t": ms, "automaton", "response", "state"}
///   POST /sessions/{id}/tick            {"t": ms}
///   GET  /sessions/{id}/state
///   GET  /sessions/{id}/guidelines
///   GET  /sessions/{id}/log             deviation records; ?format=jsonl for the full event log
///   GET  /sessions/{id}/events          server-sent events, one per log record;
///                                       resumes after Last-Event-ID or ?from=seq
///
/// Errors: {"error": {"code", "message"}} with a 4xx status.
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions);
  ~HttpService();

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gsm::service
