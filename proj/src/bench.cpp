#include "linr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "linr/error.hpp"
#include "linr/ingest.hpp"
#include "linr/rng.hpp"

namespace linr {

using nlohmann::json;

void BenchConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::kInvalidArgument, "bench config: " + msg); };
  if (n_items == 0) bad("n_items must be positive");
  if (dim == 0) bad("dim must be positive");
  if (n_queries == 0) bad("n_queries must be positive");
  if (k == 0) bad("k must be positive");
  if (n_clusters == 0) bad("n_clusters must be positive");
  if (!(cluster_spread >= 0.0)) bad("cluster_spread must be non-negative");
  if (algos.empty()) bad("algos is empty");
  if (batch_sizes.empty()) bad("batch_sizes is empty");
  for (std::size_t b : batch_sizes) {
    if (b == 0) bad("batch sizes must be positive");
  }
  for (double f : keep_fractions) {
    if (!(f > 0.0 && f <= 1.0)) bad("keep fractions must lie in (0, 1]");
  }
  for (double r : update_rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) bad("update rates must be finite and non-negative");
  }
  if (threads == 0) bad("threads must be positive");
  if (std::find(algos.begin(), algos.end(), Algo::kV3) != algos.end()) {
    if (quant_bits == 0) bad("v3 needs quant_bits > 0");
    if (keep_fractions.empty()) bad("v3 needs at least one keep fraction");
  }
  for (const auto& c : clauses) {
    if (c.universe == 0) bad("clause '" + c.name + "': universe must be positive");
    if (c.attrs_max == 0 || c.attrs_min > c.attrs_max) bad("clause '" + c.name + "': bad attrs range");
    if (c.attrs_max > c.universe) bad("clause '" + c.name + "': attrs_max exceeds universe");
    if (!(c.selectivity > 0.0 && c.selectivity <= 1.0)) {
      bad("clause '" + c.name + "': selectivity must lie in (0, 1]");
    }
  }
}

IndexConfig BenchConfig::index_config() const {
  IndexConfig config;
  config.capacity = n_items;
  config.dim = dim;
  config.quant_bits = quant_bits;
  config.seed = seed;
  for (const auto& c : clauses) config.clause_schema.push_back({c.name, c.polarity, c.attrs_max});
  return config;
}

double disjoint_probability(std::uint64_t universe, std::uint32_t item_attrs,
                            std::uint32_t query_attrs) {
  if (static_cast<std::uint64_t>(item_attrs) + query_attrs > universe) return 0.0;
  double p = 1.0;
  for (std::uint32_t i = 0; i < query_attrs; ++i) {
    p *= static_cast<double>(universe - item_attrs - i) / static_cast<double>(universe - i);
  }
  return p;
}

namespace {

double clause_pass_probability(const ClauseProfile& profile, std::uint32_t query_attrs) {
  if (query_attrs == 0) return 1.0;
  double sum = 0.0;
  for (std::uint32_t a = profile.attrs_min; a <= profile.attrs_max; ++a) {
    const double disjoint = disjoint_probability(profile.universe, a, query_attrs);
    sum += profile.polarity == Polarity::kMatch ? 1.0 - disjoint : disjoint;
  }
  return sum / static_cast<double>(profile.attrs_max - profile.attrs_min + 1);
}

std::vector<std::uint64_t> draw_distinct(Rng& rng, std::uint64_t universe, std::uint32_t count) {
  // Floyd's sampling: exactly `count` draws, no rejection loop.
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = universe - count; j < universe; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

std::vector<float> unit_gaussian(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::vector<float> around_center(Rng& rng, std::span<const float> center, double spread) {
  const std::size_t dim = center.size();
  const double scale = spread / std::sqrt(static_cast<double>(dim));
  std::vector<double> v(dim);
  double sq = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    v[i] = center[i] + scale * rng.normal();
    sq += v[i] * v[i];
  }
  const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

}  // namespace

QueryArity choose_query_arity(const ClauseProfile& profile) {
  const double target = profile.selectivity;
  QueryArity best{0, 2.0};
  double best_err = INFINITY;
  auto consider = [&](std::uint32_t q) {
    const double p = clause_pass_probability(profile, q);
    const double err = std::abs(p - target);
    if (err < best_err) {
      best_err = err;
      best = {q, p};
    }
    return p;
  };
  consider(0);
  const std::uint64_t limit = std::min<std::uint64_t>(profile.universe, UINT32_MAX);
  for (std::uint64_t q = 1; q <= limit; ++q) {
    const double p = consider(static_cast<std::uint32_t>(q));
    // Match pass probability grows with q and ReverseMatch shrinks; stop once past the target.
    if (profile.polarity == Polarity::kMatch ? p >= target : p <= target) break;
  }
  if (best_err > 0.2 * target) {
    fail(ErrorCode::kInvalidArgument,
         "unsatisfiable selectivity " + std::to_string(target) + " for clause '" + profile.name +
             "': closest achievable is " + std::to_string(best.pass_probability) +
             " (universe too small)");
  }
  return best;
}

SyntheticData gen_synthetic_data(const BenchConfig& config) {
  config.validate();
  SyntheticData data;
  for (const auto& c : config.clauses) data.arities.push_back(choose_query_arity(c));

  Rng center_rng(config.seed ^ 0x43454E54ull);
  std::vector<std::vector<float>> centers;
  centers.reserve(config.n_clusters);
  for (std::size_t c = 0; c < config.n_clusters; ++c) centers.push_back(unit_gaussian(center_rng, config.dim));

  Rng item_rng(config.seed ^ 0x4954454Dull);
  data.items.reserve(config.n_items);
  for (std::size_t i = 0; i < config.n_items; ++i) {
    const auto& center = centers[item_rng.below(config.n_clusters)];
    auto emb = around_center(item_rng, center, config.cluster_spread);
    std::vector<std::vector<std::uint64_t>> attrs;
    for (const auto& c : config.clauses) {
      const auto count = static_cast<std::uint32_t>(
          c.attrs_min + item_rng.below(c.attrs_max - c.attrs_min + 1));
      attrs.push_back(draw_distinct(item_rng, c.universe, count));
    }
    data.items.push_back(ChangeRecord::upsert(i, std::move(emb), std::move(attrs), i + 1));
  }

  Rng query_rng(config.seed ^ 0x51554552ull);
  data.queries.reserve(config.n_queries);
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    BenchQuery query;
    query.qid = q;
    const auto& center = centers[query_rng.below(config.n_clusters)];
    query.embedding = around_center(query_rng, center, config.cluster_spread);
    for (std::size_t c = 0; c < config.clauses.size(); ++c) {
      query.filter.clauses.push_back(
          draw_distinct(query_rng, config.clauses[c].universe, data.arities[c].attrs));
    }
    query.k = config.k;
    data.queries.push_back(std::move(query));
  }
  return data;
}

FixturePaths fixture_paths(const std::filesystem::path& dir) {
  return {dir / "changes.jsonl", dir / "queries.jsonl"};
}

std::string query_to_json_line(const BenchQuery& query, const IndexConfig& config) {
  json j;
  j["qid"] = query.qid;
  json emb = json::array();
  for (float v : query.embedding) emb.push_back(static_cast<double>(v));
  j["emb"] = std::move(emb);
  json filter = json::object();
  for (std::size_t c = 0; c < query.filter.clauses.size(); ++c) {
    filter[config.clause_schema.at(c).name] = query.filter.clauses[c];
  }
  j["filter"] = std::move(filter);
  j["k"] = query.k;
  return j.dump();
}

FixturePaths gen_synthetic(const BenchConfig& config, const std::filesystem::path& dir) {
  const SyntheticData data = gen_synthetic_data(config);
  const IndexConfig index_config = config.index_config();
  std::filesystem::create_directories(dir);
  const FixturePaths paths = fixture_paths(dir);
  {
    std::ofstream out(paths.changelog, std::ios::binary | std::ios::trunc);
    for (const auto& r : data.items) out << to_json_line(r, index_config) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write " + paths.changelog.string());
  }
  {
    std::ofstream out(paths.queries, std::ios::binary | std::ios::trunc);
    for (const auto& q : data.queries) out << query_to_json_line(q, index_config) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write " + paths.queries.string());
  }
  return paths;
}

std::vector<BenchQuery> read_queries(const std::filesystem::path& path, const IndexConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open query file " + path.string());
  std::vector<BenchQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
    try {
      BenchQuery q;
      q.qid = j.at("qid").get<std::uint64_t>();
      q.embedding = j.at("emb").get<std::vector<float>>();
      q.k = j.at("k").get<std::size_t>();
      q.filter = QueryFilter::pass_all(config.clause_schema.size());
      if (auto f = j.find("filter"); f != j.end()) {
        for (const auto& [name, attrs] : f->items()) {
          q.filter.clauses[config.clause_index(name)] = attrs.get<std::vector<std::uint64_t>>();
        }
      }
      q.filter = QueryFilter::normalized(std::move(q.filter.clauses));
      if (q.embedding.size() != config.dim) {
        fail(ErrorCode::kShape, where + ": query dim " + std::to_string(q.embedding.size()) +
                                    " vs index dim " + std::to_string(config.dim));
      }
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::uint64_t> brute_force_oracle(const std::vector<ItemRecord>& items,
                                              const std::vector<ClauseSpec>& schema,
                                              std::span<const float> query,
                                              const QueryFilter& filter, std::size_t k,
                                              const Scorer* scorer) {
  std::unique_ptr<PreparedScorer> prepared;
  if (scorer != nullptr) prepared = scorer->prepare(query, nullptr);

  struct Hit {
    float score;
    std::uint32_t slot;
    std::uint64_t id;
  };
  std::vector<Hit> hits;
  for (const auto& item : items) {
    bool pass = true;
    for (std::size_t c = 0; c < schema.size() && pass; ++c) {
      const auto& wanted = filter.clauses[c];
      if (wanted.empty()) continue;
      bool shared = false;
      for (std::uint64_t q : wanted) {
        for (std::uint64_t a : item.attrs[c]) shared = shared || a == q;
      }
      pass = schema[c].polarity == Polarity::kMatch ? shared : !shared;
    }
    if (!pass) continue;
    float score = 0.0f;
    if (prepared) {
      score = prepared->score(item.embedding);
    } else {
      for (std::size_t i = 0; i < query.size(); ++i) score += query[i] * item.embedding[i];
    }
    hits.push_back({score, item.slot, item.id});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.slot < b.slot;
  });
  std::vector<std::uint64_t> ids;
  for (std::size_t i = 0; i < hits.size() && i < k; ++i) ids.push_back(hits[i].id);
  return ids;
}

double recall_at_k(std::span<const std::uint64_t> result, std::span<const std::uint64_t> oracle,
                   std::size_t k) {
  const std::size_t n_oracle = std::min(oracle.size(), k);
  if (n_oracle == 0) return 1.0;
  const std::unordered_set<std::uint64_t> truth(oracle.begin(), oracle.begin() + n_oracle);
  std::unordered_set<std::uint64_t> seen;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < result.size() && i < k; ++i) {
    if (truth.contains(result[i]) && seen.insert(result[i]).second) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(n_oracle);
}

QuantEvalRow quantize_eval(std::size_t dim, std::uint32_t bits, std::size_t pairs,
                           std::uint64_t seed) {
  const OporpParams params = OporpParams::make(dim, bits, seed);
  Rng rng(seed ^ 0x5041495253ull);
  QuantEvalRow row;
  row.bits = bits;
  row.pairs = pairs;
  double sum = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto a = unit_gaussian(rng, dim);
    const auto b = unit_gaussian(rng, dim);
    double truth = 0.0;
    for (std::size_t d = 0; d < dim; ++d) truth += static_cast<double>(a[d]) * b[d];
    const auto m = matched_bits(negate(oporp_encode(params, a)), oporp_encode(params, b));
    const double err = std::abs(est_cosine(m, bits) - truth);
    sum += err;
    row.max_abs_error = std::max(row.max_abs_error, err);
  }
  row.mean_abs_error = pairs > 0 ? sum / static_cast<double>(pairs) : 0.0;
  return row;
}

double gib(std::uint64_t bytes) { return static_cast<double>(bytes) / static_cast<double>(1ull << 30); }

std::uint64_t peak_rss_bytes() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::uint64_t kib = 0;
      fields >> kib;
      return kib * 1024;
    }
  }
  return 0;
}

namespace {

using Clock = std::chrono::steady_clock;

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return values[lo] + (values[hi] - values[lo]) * (rank - static_cast<double>(lo));
}

std::string environment_descriptor() {
  std::ostringstream os;
  os << "cpus=" << std::thread::hardware_concurrency();
#if defined(__clang__)
  os << " compiler=clang-" << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  os << " compiler=gcc-" << __GNUC__ << "." << __GNUC_MINOR__;
#endif
#ifdef NDEBUG
  os << " build=release";
#else
  os << " build=debug";
#endif
  return os.str();
}

/// Re-upserts existing items with their current content at a fixed rate,
/// through the change log and an updator.
class UpdateLoad {
 public:
  UpdateLoad(Index& index, const std::vector<ItemRecord>& items, double rate,
             const std::filesystem::path& log, std::uint64_t seed) {
    std::filesystem::remove(log);
    writer_ = std::make_unique<ChangeLogWriter>(log, index.config());
    updator_ = std::make_unique<Updator>(index, log, 0, std::chrono::milliseconds(2));
    updator_->start();
    const std::uint64_t first_seq = index.applied_seq() + 1;
    producer_ = std::jthread([this, &items, rate, seed, first_seq](std::stop_token stop) {
      Rng rng(seed);
      std::uint64_t seq = first_seq;
      const auto interval = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate));
      auto next = Clock::now();
      while (!stop.stop_requested()) {
        std::this_thread::sleep_until(next);
        const auto& item = items[rng.below(items.size())];
        writer_->append_with_seq(ChangeRecord::upsert(item.id, item.embedding, item.attrs, seq++));
        next += interval;
      }
    });
  }

  std::size_t applied() const { return updator_->applied_count(); }

  ~UpdateLoad() {
    producer_.request_stop();
    producer_.join();
    updator_->wait_for_seq(writer_->last_seq(), std::chrono::seconds(10));
    updator_->stop();
  }

 private:
  std::unique_ptr<ChangeLogWriter> writer_;
  std::unique_ptr<Updator> updator_;
  std::jthread producer_;
};

}  // namespace

BenchReport run_benchmark(const BenchConfig& config, const std::filesystem::path& dir,
                          const std::optional<std::filesystem::path>& snapshot) {
  config.validate();
  const IndexConfig index_config = config.index_config();
  const FixturePaths paths = fixture_paths(dir);
  BootstrapResult boot = bootstrap(snapshot, paths.changelog, index_config);
  Index& index = *boot.index;
  if (boot.poison > 0 || index.live_count() != config.n_items) {
    fail(ErrorCode::kSchema, "fixture mismatch: " + std::to_string(index.live_count()) +
                                 " items loaded (" + std::to_string(boot.poison) +
                                 " rejected), config expects " + std::to_string(config.n_items));
  }
  const std::vector<BenchQuery> queries = read_queries(paths.queries, index_config);
  if (queries.empty()) fail(ErrorCode::kSchema, "fixture mismatch: no queries");

  const auto scorer = make_dot_scorer();
  const std::vector<ItemRecord> items = index.export_live();
  std::vector<std::vector<std::uint64_t>> oracle;
  oracle.reserve(queries.size());
  for (const auto& q : queries) {
    oracle.push_back(brute_force_oracle(items, index_config.clause_schema, q.embedding, q.filter, q.k));
  }

  BenchReport report;
  report.items = index.live_count();
  report.dim = config.dim;
  report.k = config.k;
  report.environment = environment_descriptor();

  struct Variant {
    Algo algo;
    double keep;
  };
  std::vector<Variant> variants;
  for (Algo algo : config.algos) {
    if (algo == Algo::kV3) {
      for (double keep : config.keep_fractions) variants.push_back({algo, keep});
    } else {
      variants.push_back({algo, 1.0});
    }
  }

  auto make_query = [&](const BenchQuery& q, const Variant& v) {
    Query query;
    query.embedding = q.embedding;
    query.filter = q.filter;
    query.k = q.k;
    query.algo = v.algo;
    query.keep_fraction = v.keep;
    return query;
  };

  const std::filesystem::path update_log = dir / "bench_updates.jsonl";
  for (double rate : config.update_rates) {
    std::unique_ptr<UpdateLoad> load;
    if (rate > 0.0) load = std::make_unique<UpdateLoad>(index, items, rate, update_log, config.seed);
    for (const Variant& variant : variants) {
      for (std::size_t batch : config.batch_sizes) {
        const std::size_t warm = std::min(config.warmup_queries, queries.size());
        for (std::size_t i = 0; i < warm; ++i) run_query(index, make_query(queries[i], variant), *scorer);

        BenchRow row;
        row.algo = variant.algo;
        row.batch = batch;
        row.keep_fraction = variant.keep;
        row.update_rate = rate;
        row.min_recall = 1.0;
        row.pass_rate_min = 1.0;
        const std::size_t applied_before = load ? load->applied() : 0;
        std::vector<double> latencies;
        double recall_sum = 0.0;
        double pass_sum = 0.0;
        for (std::size_t start = 0; start < queries.size(); start += batch) {
          const std::size_t end = std::min(start + batch, queries.size());
          std::vector<Query> chunk;
          for (std::size_t i = start; i < end; ++i) chunk.push_back(make_query(queries[i], variant));
          const auto t0 = Clock::now();
          std::vector<RetrievalResult> results;
          if (chunk.size() == 1) {
            results.push_back(run_query(index, chunk[0], *scorer));
          } else {
            results = run_batch(index, chunk, *scorer, config.threads);
          }
          latencies.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
          for (std::size_t i = start; i < end; ++i) {
            const auto& result = results[i - start];
            const double recall = recall_at_k(result.ids(), oracle[i], queries[i].k);
            const double pass = static_cast<double>(result.pass_count) / static_cast<double>(report.items);
            recall_sum += recall;
            pass_sum += pass;
            row.min_recall = std::min(row.min_recall, recall);
            row.pass_rate_min = std::min(row.pass_rate_min, pass);
            row.pass_rate_max = std::max(row.pass_rate_max, pass);
          }
        }
        row.queries = queries.size();
        row.recall = recall_sum / static_cast<double>(queries.size());
        row.pass_rate_mean = pass_sum / static_cast<double>(queries.size());
        double total = 0.0;
        for (double l : latencies) total += l;
        row.avg_ms = total / static_cast<double>(latencies.size());
        row.p95_ms = percentile(latencies, 0.95);
        row.updates_applied = load ? load->applied() - applied_before : 0;
        report.rows.push_back(row);
      }
    }
  }
  std::filesystem::remove(update_log);

  const std::uint32_t bits = config.quant_bits > 0 ? config.quant_bits : 64;
  report.memory.index_bytes = estimate_footprint(index_config).total();
  report.memory.peak_rss_bytes = peak_rss_bytes();
  report.memory.bench_codes = compression_report(config.n_items, config.dim, 2, bits);
  report.memory.extrapolated = compression_report(1'000'000'000ull, config.dim, 2, bits);
  return report;
}

namespace {

json compression_json(const CompressionReport& c) {
  return {{"items", c.items},
          {"dim", c.dim},
          {"bytes_per_value", c.bytes_per_value},
          {"bits", c.bits},
          {"embedding_bytes", c.embedding_bytes},
          {"code_bytes", c.code_bytes},
          {"embedding_gib", gib(c.embedding_bytes)},
          {"code_gib", gib(c.code_bytes)},
          {"ratio", c.ratio()}};
}

}  // namespace

std::string BenchReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"algo", algo_name(r.algo)},
                         {"batch", r.batch},
                         {"keep_fraction", r.keep_fraction},
                         {"update_rate", r.update_rate},
                         {"avg_latency_ms", r.avg_ms},
                         {"p95_latency_ms", r.p95_ms},
                         {"recall_at_k", r.recall},
                         {"min_recall_at_k", r.min_recall},
                         {"pass_rate", {{"mean", r.pass_rate_mean}, {"min", r.pass_rate_min}, {"max", r.pass_rate_max}}},
                         {"queries", r.queries},
                         {"updates_applied", r.updates_applied}});
  }
  json j;
  j["items"] = items;
  j["dim"] = dim;
  j["k"] = k;
  j["environment"] = environment;
  j["rows"] = std::move(rows_json);
  j["memory"] = {{"index_bytes", memory.index_bytes},
                 {"index_gib", gib(memory.index_bytes)},
                 {"peak_rss_bytes", memory.peak_rss_bytes},
                 {"bench", compression_json(memory.bench_codes)},
                 {"extrapolated", compression_json(memory.extrapolated)}};
  return j.dump(2);
}

std::string BenchReport::to_table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %6s %7s %8s %12s %12s %10s %10s %10s\n", "algo", "batch",
                "keep", "upd/s", "avg_ms", "p95_ms", "recall@k", "min_rec", "pass_rate");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-4s %6zu %7.4f %8.0f %12.3f %12.3f %10.4f %10.4f %10.5f\n",
                  std::string(algo_name(r.algo)).c_str(), r.batch, r.keep_fraction, r.update_rate,
                  r.avg_ms, r.p95_ms, r.recall, r.min_recall, r.pass_rate_mean);
    os << line;
  }
  const auto& b = memory.bench_codes;
  const auto& x = memory.extrapolated;
  std::snprintf(line, sizeof line, "codes: dim=%zu %zu-byte values -> %u-bit codes, compression %.1fx\n",
                b.dim, b.bytes_per_value, b.bits, b.ratio());
  os << line;
  std::snprintf(line, sizeof line, "at %llu items: %.2f GiB embeddings -> %.2f GiB codes\n",
                static_cast<unsigned long long>(x.items), gib(x.embedding_bytes), gib(x.code_bytes));
  os << line;
  std::snprintf(line, sizeof line, "index stores: %.3f GiB, peak rss: %.3f GiB, %s\n",
                gib(memory.index_bytes), gib(memory.peak_rss_bytes), environment.c_str());
  os << line;
  return os.str();
}

}  // namespace linr
