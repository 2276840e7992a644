#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "linr/config.hpp"
#include "linr/index.hpp"
#include "linr/retrieval.hpp"
#include "linr/scoring.hpp"

namespace linr {

/// Attribute model of one clause. Every item draws a uniform count in
/// [attrs_min, attrs_max] of distinct ids from [0, universe); a query draws the
/// number of distinct ids whose exact pass probability is closest to
/// `selectivity`.
struct ClauseProfile {
  std::string name;
  Polarity polarity = Polarity::kMatch;
  std::uint64_t universe = 100;
  std::uint32_t attrs_min = 1;
  std::uint32_t attrs_max = 1;
  double selectivity = 1.0;  // in (0, 1]
};

struct BenchConfig {
  std::size_t n_items = 100000;
  std::size_t dim = 128;
  std::uint32_t quant_bits = 512;
  std::vector<ClauseProfile> clauses;
  std::size_t n_queries = 1000;
  std::size_t warmup_queries = 20;
  std::size_t k = 200;
  std::size_t n_clusters = 50;
  double cluster_spread = 1.0;  // noise norm relative to the unit cluster center
  std::vector<Algo> algos = {Algo::kV1, Algo::kV2};
  std::vector<std::size_t> batch_sizes = {1};
  std::vector<double> keep_fractions = {0.01, 0.1, 1.0};  // V3 rows
  std::vector<double> update_rates = {0.0};               // records per second
  std::size_t threads = 1;
  std::uint64_t seed = 42;

  void validate() const;
  IndexConfig index_config() const;
};

/// Number of query attributes for one clause and its exact pass probability.
struct QueryArity {
  std::uint32_t attrs = 0;  // 0 disables the clause
  double pass_probability = 1.0;
};

/// Throws kInvalidArgument ("unsatisfiable") when no arity lands within 20% of
/// the target.
QueryArity choose_query_arity(const ClauseProfile& profile);

/// Probability that an item with `item_attrs` distinct ids and a query with
/// `query_attrs` distinct ids, both uniform over `universe`, share no id.
double disjoint_probability(std::uint64_t universe, std::uint32_t item_attrs,
                            std::uint32_t query_attrs);

struct BenchQuery {
  std::uint64_t qid = 0;
  std::vector<float> embedding;
  QueryFilter filter;
  std::size_t k = 0;
};

struct SyntheticData {
  std::vector<ChangeRecord> items;  // upserts with seq 1..n
  std::vector<BenchQuery> queries;
  std::vector<QueryArity> arities;  // per clause
};

SyntheticData gen_synthetic_data(const BenchConfig& config);

/// Writes `changes.jsonl` and `queries.jsonl` under `dir`.
struct FixturePaths {
  std::filesystem::path changelog;
  std::filesystem::path queries;
};
FixturePaths fixture_paths(const std::filesystem::path& dir);
FixturePaths gen_synthetic(const BenchConfig& config, const std::filesystem::path& dir);

std::string query_to_json_line(const BenchQuery& query, const IndexConfig& config);
std::vector<BenchQuery> read_queries(const std::filesystem::path& path, const IndexConfig& config);

/// Ground truth by naive per-item set logic and a full sort. Without a scorer
/// the score is a plain float dot product accumulated in index order.
std::vector<std::uint64_t> brute_force_oracle(const std::vector<ItemRecord>& items,
                                              const std::vector<ClauseSpec>& schema,
                                              std::span<const float> query,
                                              const QueryFilter& filter, std::size_t k,
                                              const Scorer* scorer = nullptr);

/// |result ∩ oracle| / |oracle|; an empty oracle gives 1.0.
double recall_at_k(std::span<const std::uint64_t> result, std::span<const std::uint64_t> oracle,
                   std::size_t k);

struct BenchRow {
  Algo algo = Algo::kV1;
  std::size_t batch = 1;
  double keep_fraction = 1.0;
  double update_rate = 0.0;
  double avg_ms = 0.0;  // per batch
  double p95_ms = 0.0;
  double recall = 0.0;  // mean over queries
  double min_recall = 0.0;
  double pass_rate_mean = 0.0;
  double pass_rate_min = 0.0;
  double pass_rate_max = 0.0;
  std::size_t queries = 0;
  std::size_t updates_applied = 0;
};

struct MemoryReport {
  std::uint64_t index_bytes = 0;   // pre-allocated stores of the bench index
  std::uint64_t peak_rss_bytes = 0;
  CompressionReport bench_codes;   // bench items at two-byte precision
  CompressionReport extrapolated;  // 10^9 items at the same shape
};

struct BenchReport {
  std::vector<BenchRow> rows;
  MemoryReport memory;
  std::string environment;
  std::size_t items = 0;
  std::size_t dim = 0;
  std::size_t k = 0;

  std::string to_json() const;
  std::string to_table() const;
};

/// Loads the fixtures under `dir` (from `snapshot` plus the log tail when a
/// snapshot is given and exists), then measures every (update rate, algo,
/// batch[, keep]) combination. Latency is wall clock around each batch call;
/// warm-up queries are not recorded.
BenchReport run_benchmark(const BenchConfig& config, const std::filesystem::path& dir,
                          const std::optional<std::filesystem::path>& snapshot = std::nullopt);

/// Mean and max |est_cosine - cosine| over `pairs` independent pairs of
/// uniformly random unit vectors, coded with a sketch seeded by `seed`.
struct QuantEvalRow {
  std::uint32_t bits = 0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t pairs = 0;
};

QuantEvalRow quantize_eval(std::size_t dim, std::uint32_t bits, std::size_t pairs,
                           std::uint64_t seed);

double gib(std::uint64_t bytes);

/// Peak resident set size of this process, 0 when unavailable.
std::uint64_t peak_rss_bytes();

}  // namespace linr
