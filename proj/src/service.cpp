#include "linr/service.hpp"

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

#include "linr/bench.hpp"
#include "linr/error.hpp"
#include "linr/retrieval.hpp"

namespace linr {

using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  json j;
  j["error"] = {{"code", code}, {"message", message}};
  return {status, j.dump()};
}

HttpReply error_reply(const Error& e) {
  const int status = e.code() == ErrorCode::kCapacityExhausted ? 409 : 400;
  return error_reply(status, std::string(error_code_name(e.code())), e.what());
}

json parse_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("request body: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

std::vector<std::vector<std::uint64_t>> read_clause_lists(const json& j, const IndexConfig& config,
                                                          const char* what) {
  std::vector<std::vector<std::uint64_t>> lists(config.clause_schema.size());
  if (j.is_null()) return lists;
  if (!j.is_object()) fail(ErrorCode::kParse, std::string(what) + " must be an object");
  for (const auto& [name, ids] : j.items()) {
    const std::size_t c = config.clause_index(name);
    if (!ids.is_array()) fail(ErrorCode::kParse, std::string(what) + "." + name + " must be an array");
    for (const auto& id : ids) {
      if (!id.is_number_unsigned()) fail(ErrorCode::kParse, "attribute ids must be unsigned integers");
      lists[c].push_back(id.get<std::uint64_t>());
    }
  }
  return lists;
}

std::vector<float> read_floats(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorCode::kParse, std::string(what) + " must be an array of numbers");
  std::vector<float> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::kParse, std::string(what) + " must be an array of numbers");
    out.push_back(v.get<float>());
  }
  return out;
}

std::uint64_t read_id(const json& j) {
  auto it = j.find("id");
  if (it == j.end() || !it->is_number_unsigned()) fail(ErrorCode::kParse, "'id' must be an unsigned integer");
  return it->get<std::uint64_t>();
}

}  // namespace

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon + 1 == bind.size()) {
    fail(ErrorCode::kInvalidArgument, "bind address must look like host:port, got '" + bind + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "bad port in '" + bind + "'");
  }
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidArgument, "port out of range in '" + bind + "'");
  return {bind.substr(0, colon), port};
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  options_.index.validate();
  scorer_ = make_scorer(options_.scorer, options_.index.dim);
  server_ = std::make_unique<httplib::Server>();
  auto route = [this](const char* method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = handle(method, req.path, req.body);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
    };
  };
  for (const char* path : {"/query", "/upsert", "/delete", "/snapshot"}) server_->Post(path, route("POST"));
  for (const char* path : {"/stats", "/healthz"}) server_->Get(path, route("GET"));
}

Service::~Service() {
  stop();
  if (bootstrap_thread_.joinable()) bootstrap_thread_.join();
  if (updator_) updator_->stop();
}

void Service::bootstrap() {
  try {
    BootstrapResult boot = linr::bootstrap(options_.snapshot, options_.changelog, options_.index);
    index_ = std::move(boot.index);
    writer_ = std::make_unique<ChangeLogWriter>(options_.changelog, options_.index);
    updator_ = std::make_unique<Updator>(*index_, options_.changelog, boot.log_offset, options_.poll_interval);
    updator_->start();
    ready_.store(true, std::memory_order_release);
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    bootstrap_error_ = e.what();
    throw;
  }
}

void Service::bootstrap_async() {
  bootstrap_thread_ = std::jthread([this] {
    try {
      bootstrap();
    } catch (const std::exception&) {
      // kept in bootstrap_error_; the service stays at 503
    }
  });
}

std::string Service::bootstrap_error() const {
  std::lock_guard lock(mutex_);
  return bootstrap_error_;
}

std::uint64_t Service::log_seq() const { return writer_ ? writer_->last_seq() : 0; }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

HttpReply Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  if (method == "GET" && path == "/healthz") {
    if (!ready()) {
      const std::string err = bootstrap_error();
      return error_reply(503, "unavailable", err.empty() ? "bootstrapping" : "bootstrap failed: " + err);
    }
    return {200, R"({"status":"ok"})"};
  }
  if (!ready()) return error_reply(503, "unavailable", "bootstrap has not completed");
  try {
    if (method == "POST" && path == "/query") return query(body);
    if (method == "POST" && path == "/upsert") return upsert(body);
    if (method == "POST" && path == "/delete") return erase(body);
    if (method == "POST" && path == "/snapshot") return snapshot();
    if (method == "GET" && path == "/stats") return stats();
    return error_reply(404, "not_found", method + " " + path);
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const json::exception& e) {
    return error_reply(400, "parse", e.what());
  }
}

HttpReply Service::query(const std::string& body) {
  const json j = parse_body(body);
  const IndexConfig& config = index_->config();
  Query q;
  auto emb = j.find("emb");
  if (emb == j.end()) fail(ErrorCode::kParse, "query needs 'emb'");
  q.embedding = read_floats(*emb, "'emb'");
  if (auto f = j.find("features"); f != j.end()) {
    if (!f->is_object()) fail(ErrorCode::kParse, "'features' must be an object");
    FeatureBundle features;
    for (const auto& [name, values] : f->items()) features[name] = read_floats(values, "feature");
    q.features = std::move(features);
  }
  q.filter = QueryFilter::normalized(
      read_clause_lists(j.contains("filter") ? j["filter"] : json(), config, "'filter'"));
  if (auto k = j.find("k"); k != j.end()) {
    if (!k->is_number_unsigned()) fail(ErrorCode::kParse, "'k' must be a positive integer");
    q.k = k->get<std::size_t>();
  }
  const std::string algo = j.value("algo", std::string("auto"));
  q.algo = algo == "auto" ? choose_algo(*index_, q.filter) : parse_algo(algo);
  if (auto keep = j.find("keep_fraction"); keep != j.end()) {
    if (!keep->is_number()) fail(ErrorCode::kParse, "'keep_fraction' must be a number");
    q.keep_fraction = keep->get<double>();
  }

  RetrievalResult result = run_query(*index_, q, *scorer_);
  std::stable_sort(result.items.begin(), result.items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  });
  json items = json::array();
  for (const auto& item : result.items) items.push_back({{"id", item.id}, {"score", item.score}});
  const auto& t = result.timings;
  json out;
  out["items"] = std::move(items);
  out["pass_count"] = result.pass_count;
  out["algo"] = algo_name(q.algo);
  out["timings_ms"] = {{"filter", t.filter_ms}, {"quant", t.quant_ms}, {"score", t.score_ms},
                       {"topk", t.topk_ms},     {"total", t.total_ms}};
  out["applied_seq"] = index_->applied_seq();
  return {200, out.dump()};
}

std::optional<HttpReply> Service::wait_if_asked(bool wait, std::uint64_t seq) {
  if (!wait) return std::nullopt;
  if (!updator_->wait_for_seq(seq, std::chrono::seconds(30))) {
    return error_reply(503, "timeout", "record " + std::to_string(seq) + " not applied within 30 s");
  }
  return std::nullopt;
}

HttpReply Service::upsert(const std::string& body) {
  const json j = parse_body(body);
  const IndexConfig& config = index_->config();
  ChangeRecord record;
  record.kind = ChangeKind::kUpsert;
  record.item_id = read_id(j);
  auto emb = j.find("emb");
  if (emb == j.end()) fail(ErrorCode::kParse, "upsert needs 'emb'");
  record.embedding = read_floats(*emb, "'emb'");
  record.attrs = read_clause_lists(j.contains("attrs") ? j["attrs"] : json(), config, "'attrs'");
  validate_upsert_record(config, record);

  std::uint64_t seq = 0;
  {
    std::lock_guard lock(mutex_);
    const std::uint64_t applied = index_->applied_seq();
    std::erase_if(pending_new_, [&](const auto& entry) { return entry.second <= applied; });
    const bool known = index_->contains(record.item_id) || pending_new_.contains(record.item_id);
    if (!known && index_->live_count() + pending_new_.size() >= config.capacity) {
      return error_reply(409, std::string(error_code_name(ErrorCode::kCapacityExhausted)),
                         "index is full (capacity " + std::to_string(config.capacity) + ")");
    }
    seq = writer_->append(record);
    if (!known) pending_new_[record.item_id] = seq;
  }
  if (auto timeout = wait_if_asked(j.value("wait", false), seq)) return *timeout;
  return {200, json{{"seq", seq}}.dump()};
}

HttpReply Service::erase(const std::string& body) {
  const json j = parse_body(body);
  const std::uint64_t id = read_id(j);
  const std::uint64_t seq = writer_->append(ChangeRecord::erase(id));
  if (auto timeout = wait_if_asked(j.value("wait", false), seq)) return *timeout;
  return {200, json{{"seq", seq}}.dump()};
}

HttpReply Service::snapshot() {
  if (options_.snapshot_out.empty()) return error_reply(404, "not_found", "snapshot output is not configured");
  const std::uint64_t watermark = write_snapshot(*index_, options_.snapshot_out);
  json out{{"seq_watermark", watermark}, {"path", options_.snapshot_out.string()}, {"items", index_->live_count()}};
  return {200, out.dump()};
}

HttpReply Service::stats() const {
  const MemoryFootprint fp = estimate_footprint(index_->config());
  json out;
  out["live"] = index_->live_count();
  out["hwm"] = index_->high_water_mark();
  out["capacity"] = index_->config().capacity;
  out["applied_seq"] = index_->applied_seq();
  out["log_seq"] = log_seq();
  out["poison"] = updator_->poison_count();
  out["memory"] = {{"embedding_bytes", fp.embedding_bytes}, {"clause_bytes", fp.clause_bytes},
                   {"code_bytes", fp.code_bytes},           {"registry_bytes", fp.registry_bytes},
                   {"total_bytes", fp.total()},             {"peak_rss_bytes", peak_rss_bytes()}};
  return {200, out.dump()};
}

}  // namespace linr
