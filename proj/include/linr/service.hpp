#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "linr/config.hpp"
#include "linr/index.hpp"
#include "linr/ingest.hpp"
#include "linr/scoring.hpp"

namespace httplib {
class Server;
}

namespace linr {

struct ServiceOptions {
  IndexConfig index;
  ScorerSpec scorer;
  std::optional<std::filesystem::path> snapshot;  // loaded at bootstrap when present
  std::filesystem::path changelog;
  std::filesystem::path snapshot_out;  // POST /snapshot target; empty disables it
  std::size_t threads = 1;             // workers for batched queries
  std::chrono::milliseconds poll_interval{2};
};

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

/// JSON-over-HTTP front end of one index. Reads hit the shared index directly;
/// writes are appended to the change log and applied by the updator.
///
///   POST /query     {"emb":[...], "features":{...}?, "filter":{clause:[ids]}, "k":n,
///                    "algo":"v1"|"v2"|"v3"|"auto", "keep_fraction":f?}
///                   -> {"items":[{"id","score"}], "pass_count", "timings_ms":{...}, "applied_seq"}
///   POST /upsert    {"id", "emb", "attrs":{clause:[ids]}, "wait":bool?} -> {"seq"}
///   POST /delete    {"id", "wait":bool?} -> {"seq"}
///   POST /snapshot  {} -> {"seq_watermark", "path", "items"}
///   GET  /stats     -> {"live", "hwm", "capacity", "applied_seq", "log_seq", "poison", "memory":{...}}
///   GET  /healthz   -> {"status":"ok"}
///
/// Errors are {"error":{"code","message"}} with 400 for bad requests, 409 when
/// a new id meets a full index and 503 until bootstrap completes.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Loads snapshot + log and starts the updator. Blocking.
  void bootstrap();
  /// Runs bootstrap() on a background thread; requests get 503 meanwhile.
  void bootstrap_async();
  bool ready() const { return ready_.load(std::memory_order_acquire); }
  /// Non-empty when bootstrap failed.
  std::string bootstrap_error() const;

  /// Request dispatch without a socket.
  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

  /// Binds `host:port` (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  bool listen();
  void stop();

  /// Valid after bootstrap.
  const Index& index() const { return *index_; }
  std::uint64_t log_seq() const;

 private:
  HttpReply query(const std::string& body);
  HttpReply upsert(const std::string& body);
  HttpReply erase(const std::string& body);
  HttpReply snapshot();
  HttpReply stats() const;
  std::optional<HttpReply> wait_if_asked(bool wait, std::uint64_t seq);

  ServiceOptions options_;
  std::shared_ptr<const Scorer> scorer_;
  std::unique_ptr<Index> index_;
  std::unique_ptr<ChangeLogWriter> writer_;
  std::unique_ptr<Updator> updator_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> ready_{false};
  mutable std::mutex mutex_;  // bootstrap error, pending reservations
  std::string bootstrap_error_;
  std::map<std::uint64_t, std::uint64_t> pending_new_;  // id -> seq of an unapplied insert
  std::jthread bootstrap_thread_;
};

/// Splits "host:port"; throws kInvalidArgument.
std::pair<std::string, int> parse_bind(const std::string& bind);

}  // namespace linr
