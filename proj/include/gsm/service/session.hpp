#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "gsm/service/runtime.hpp"

namespace gsm::service {

/// Request-level failure with an HTTP status and a short machine code.
struct ServiceError : std::runtime_error {
  ServiceError(int s, std::string c, const std::string& msg) : std::runtime_error(msg), status(s), code(std::move(c)) {}
  int status;
  std::string code;
};

enum class ClockMode { Virtual, Wall };

struct SessionOptions {
  Valuation params;
  ClockMode clock = ClockMode::Virtual;
  /// Every record is appended here as it is produced.
  std::optional<std::filesystem::path> log_path;
  /// Timer resolution in wall-clock mode.
  std::chrono::milliseconds tick_interval{100};
};

/// One patient. All mutations go through one mutex, so the log is a single
/// total order; subscribers read it by sequence number.
class Session {
 public:
  Session(std::string id, std::shared_ptr<const CompiledPack> base, SessionOptions options);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  /// Allowed only before start.
  void set_params(const Valuation& overrides);
  /// Freezes parameters; in wall-clock mode starts the session clock.
  json start();

  json measurements(const json& body);
  json physician(const json& body);
  /// Virtual clock only: lets time pass to `t`.
  json tick(const json& body);

  json state() const;
  json guidelines() const;
  json deviations() const;
  std::string log_text() const;
  json info() const;

  /// Records with seq >= `from`, waiting up to `timeout` for the first one.
  std::vector<json> records_from(std::size_t from, std::chrono::milliseconds timeout) const;
  void close();
  bool closed() const;

 private:
  json run(const std::function<std::vector<json>(Runtime&, Millis)>& command, const json& body);
  Millis clock_now() const;
  void flush(std::size_t from);
  void ticker();

  std::string id_;
  std::shared_ptr<const CompiledPack> base_;
  SessionOptions options_;
  Valuation params_;
  std::unique_ptr<Runtime> runtime_;
  bool started_ = false;
  bool closed_ = false;
  std::chrono::steady_clock::time_point origin_;
  std::ofstream log_file_;
  std::thread ticker_;

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
};

class SessionManager {
 public:
  explicit SessionManager(std::shared_ptr<const CompiledPack> pack, std::optional<std::filesystem::path> log_dir = {});
  ~SessionManager();

  /// Body: {"params": {...}, "clock": "virtual"|"wall"}. Throws ServiceError.
  std::shared_ptr<Session> create(const json& body);
  std::shared_ptr<Session> find(const std::string& id) const;
  json list() const;
  const CompiledPack& pack() const { return *pack_; }
  /// Pack summary for clients: automata with states and inputs, params, timers.
  json describe() const;
  void close_all();

 private:
  std::shared_ptr<const CompiledPack> pack_;
  std::optional<std::filesystem::path> log_dir_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_ = 1;
  mutable std::mutex mutex_;
};

}  // namespace gsm::service
