#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "linr/clause_filter.hpp"
#include "linr/index.hpp"
#include "linr/scoring.hpp"

namespace linr {

/// V1: score every slot, then mask. V2: mask, compact, score passers.
/// V3: mask, rank passers by matched sign bits, full-precision rerank of the
/// kept fraction.
enum class Algo : std::uint8_t { kV1, kV2, kV3 };

std::string_view algo_name(Algo algo);
Algo parse_algo(std::string_view name);

struct Query {
  std::vector<float> embedding;
  std::optional<FeatureBundle> features;
  QueryFilter filter;
  std::size_t k = 10;
  Algo algo = Algo::kV1;
  double keep_fraction = 1.0;  // V3 only, in (0, 1]
  bool rank_by_bits = false;   // V3 only: skip the full-precision stage

  void validate() const;
};

struct StageTimings {
  double filter_ms = 0.0;
  double quant_ms = 0.0;
  double score_ms = 0.0;
  double topk_ms = 0.0;
  double total_ms = 0.0;
  std::size_t scored = 0;  // items that went through the full-precision scorer
  std::size_t kept = 0;    // V3 survivors of the sign-bit stage
};

struct ScoredItem {
  std::uint64_t id = 0;
  float score = 0.0f;

  bool operator==(const ScoredItem&) const = default;
};

struct RetrievalResult {
  std::vector<ScoredItem> items;  // score descending, ties by ascending slot
  std::size_t pass_count = 0;
  StageTimings timings;

  std::vector<std::uint64_t> ids() const;
};

struct ScoredSlot {
  std::uint32_t slot = 0;
  float score = 0.0f;

  bool operator==(const ScoredSlot&) const = default;
};

/// Strict ranking used everywhere: higher score first, lower slot on ties.
inline bool ranks_before(const ScoredSlot& a, const ScoredSlot& b) {
  return a.score > b.score || (a.score == b.score && a.slot < b.slot);
}

/// Keeps the best `k` of `candidates` in ranking order.
void select_top(std::vector<ScoredSlot>& candidates, std::size_t k);

/// The `k` best slots among those with mask = 1. Masked-out slots are
/// excluded outright rather than given a zero score, so a passing negative
/// score still outranks every masked slot.
std::vector<ScoredSlot> topk_select(std::span<const float> scores,
                                    std::span<const std::uint8_t> mask, std::size_t k);

/// Number of candidates V3 carries into the full-precision stage.
std::size_t v3_keep_count(double keep_fraction, std::size_t pass_count, std::size_t k);

RetrievalResult query_v1(const Index& index, const Query& query, const Scorer& scorer);
RetrievalResult query_v2(const Index& index, const Query& query, const Scorer& scorer);
RetrievalResult query_v3(const Index& index, const Query& query, const Scorer& scorer);

/// Dispatches on query.algo.
RetrievalResult run_query(const Index& index, const Query& query, const Scorer& scorer);

/// Independent parallel execution of a query batch over the shared index.
std::vector<RetrievalResult> run_batch(const Index& index, std::span<const Query> queries,
                                       const Scorer& scorer, std::size_t threads);

/// Estimated pass rate from an evenly spaced sample of slots.
double estimate_pass_rate(const Index& index, const QueryFilter& filter,
                          std::size_t sample = 1024);

/// V2 below `threshold` estimated pass rate, V1 otherwise.
Algo choose_algo(const Index& index, const QueryFilter& filter, double threshold = 0.1);

}  // namespace linr
