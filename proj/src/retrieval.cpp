#include "linr/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "linr/error.hpp"

namespace linr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct ScoreRead {
  float score;
  std::uint64_t id;
};

struct JointRead {
  bool pass;
  float score;
  std::uint64_t id;
};

void check_query(const Index& index, const Query& query) {
  query.validate();
  if (query.embedding.size() != index.dim()) {
    fail(ErrorCode::kShape, "query dim " + std::to_string(query.embedding.size()) +
                                " vs index dim " + std::to_string(index.dim()));
  }
  check_filter_arity(index.clauses(), query.filter);
}

JointRead read_joint(const Index& index, std::size_t slot, const QueryFilter& filter,
                     const PreparedScorer& scorer) {
  return index
      .read_slot(slot,
                 [&](const SlotView& v) {
                   const bool pass = index.slot_passes(v, filter);
                   return JointRead{pass, pass ? scorer.score(v.embedding) : 0.0f, v.id};
                 })
      .first;
}

RetrievalResult finish(std::vector<ScoredSlot> top, const std::vector<std::uint64_t>& ids_by_slot,
                       std::size_t pass_count, StageTimings timings, Clock::time_point start) {
  RetrievalResult result;
  result.pass_count = pass_count;
  result.items.reserve(top.size());
  for (const auto& s : top) result.items.push_back({ids_by_slot[s.slot], s.score});
  timings.total_ms = ms_since(start);
  result.timings = timings;
  return result;
}

}  // namespace

std::string_view algo_name(Algo algo) {
  switch (algo) {
    case Algo::kV1: return "v1";
    case Algo::kV2: return "v2";
    case Algo::kV3: return "v3";
  }
  return "v1";
}

Algo parse_algo(std::string_view name) {
  if (name == "v1" || name == "V1") return Algo::kV1;
  if (name == "v2" || name == "V2") return Algo::kV2;
  if (name == "v3" || name == "V3") return Algo::kV3;
  fail(ErrorCode::kInvalidArgument, "unknown algo '" + std::string(name) + "'");
}

void Query::validate() const {
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "keep_fraction must be in (0, 1]");
  }
}

std::vector<std::uint64_t> RetrievalResult::ids() const {
  std::vector<std::uint64_t> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

void select_top(std::vector<ScoredSlot>& candidates, std::size_t k) {
  if (candidates.size() > k) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                     candidates.end(), ranks_before);
    candidates.resize(k);
  }
  std::sort(candidates.begin(), candidates.end(), ranks_before);
}

std::vector<ScoredSlot> topk_select(std::span<const float> scores,
                                    std::span<const std::uint8_t> mask, std::size_t k) {
  if (scores.size() != mask.size()) fail(ErrorCode::kShape, "topk_select: scores/mask length differ");
  std::vector<ScoredSlot> candidates;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) candidates.push_back({static_cast<std::uint32_t>(i), scores[i]});
  }
  select_top(candidates, k);
  return candidates;
}

std::size_t v3_keep_count(double keep_fraction, std::size_t pass_count, std::size_t k) {
  // The small epsilon keeps e.g. 0.01 * 100000 from rounding up to 1001.
  const double raw = std::ceil(keep_fraction * static_cast<double>(pass_count) - 1e-9);
  std::size_t kept = raw <= 0.0 ? 0 : static_cast<std::size_t>(raw);
  kept = std::max(kept, std::min(k, pass_count));
  return std::min(kept, pass_count);
}

RetrievalResult query_v1(const Index& index, const Query& query, const Scorer& scorer) {
  const auto start = Clock::now();
  check_query(index, query);
  StageTimings t;
  const auto prepared = scorer.prepare(query.embedding, query.features ? &*query.features : nullptr);
  const std::size_t hwm = index.high_water_mark();

  auto stage = Clock::now();
  std::vector<float> scores(hwm);
  std::vector<std::uint64_t> ids(hwm);
  std::vector<std::uint32_t> score_versions(hwm);
  for (std::size_t slot = 0; slot < hwm; ++slot) {
    auto [read, version] = index.read_slot(slot, [&](const SlotView& v) {
      return ScoreRead{prepared->score(v.embedding), v.id};
    });
    scores[slot] = read.score;
    ids[slot] = read.id;
    score_versions[slot] = version;
  }
  t.score_ms = ms_since(stage);
  t.scored = hwm;

  stage = Clock::now();
  FilterMask fm = index.eval_query_filter(query.filter);
  fm.mask.resize(hwm);  // a concurrent insert may have raised the mark in between
  std::size_t pass_count = 0;
  for (std::size_t slot = 0; slot < hwm; ++slot) {
    if (fm.mask[slot] && fm.versions[slot] != score_versions[slot]) {
      const JointRead j = read_joint(index, slot, query.filter, *prepared);
      fm.mask[slot] = j.pass ? 1 : 0;
      scores[slot] = j.score;
      ids[slot] = j.id;
    }
    pass_count += fm.mask[slot];
  }
  t.filter_ms = ms_since(stage);

  stage = Clock::now();
  auto top = topk_select(scores, fm.mask, query.k);
  t.topk_ms = ms_since(stage);
  return finish(std::move(top), ids, pass_count, t, start);
}

RetrievalResult query_v2(const Index& index, const Query& query, const Scorer& scorer) {
  const auto start = Clock::now();
  check_query(index, query);
  StageTimings t;
  const auto prepared = scorer.prepare(query.embedding, query.features ? &*query.features : nullptr);

  auto stage = Clock::now();
  const FilterMask fm = index.eval_query_filter(query.filter);
  std::vector<std::uint32_t> passing;
  passing.reserve(fm.pass_count);
  for (std::size_t slot = 0; slot < fm.mask.size(); ++slot) {
    if (fm.mask[slot]) passing.push_back(static_cast<std::uint32_t>(slot));
  }
  t.filter_ms = ms_since(stage);

  stage = Clock::now();
  std::vector<ScoredSlot> candidates;
  candidates.reserve(passing.size());
  std::vector<std::uint64_t> ids(fm.mask.size());
  std::size_t pass_count = 0;
  for (std::uint32_t slot : passing) {
    auto [read, version] = index.read_slot(slot, [&](const SlotView& v) {
      return ScoreRead{prepared->score(v.embedding), v.id};
    });
    ++t.scored;
    if (version != fm.versions[slot]) {
      const JointRead j = read_joint(index, slot, query.filter, *prepared);
      if (!j.pass) continue;
      read = {j.score, j.id};
    }
    ids[slot] = read.id;
    candidates.push_back({slot, read.score});
    ++pass_count;
  }
  t.score_ms = ms_since(stage);

  stage = Clock::now();
  select_top(candidates, query.k);
  t.topk_ms = ms_since(stage);
  return finish(std::move(candidates), ids, pass_count, t, start);
}

RetrievalResult query_v3(const Index& index, const Query& query, const Scorer& scorer) {
  const auto start = Clock::now();
  if (!index.quantized()) {
    fail(ErrorCode::kUnsupported, "v3 requires an index built with quant_bits > 0");
  }
  check_query(index, query);
  StageTimings t;
  const auto prepared = scorer.prepare(query.embedding, query.features ? &*query.features : nullptr);
  const OporpParams& params = *index.oporp();
  const BitCode query_not = negate(oporp_encode(params, query.embedding));

  auto stage = Clock::now();
  const FilterMask fm = index.eval_query_filter(query.filter);
  t.filter_ms = ms_since(stage);

  stage = Clock::now();
  struct Coarse {
    std::uint32_t slot;
    std::uint32_t matched;
    std::uint32_t version;
    std::uint64_t id;
  };
  std::vector<Coarse> coarse;
  coarse.reserve(fm.pass_count);
  for (std::size_t slot = 0; slot < fm.mask.size(); ++slot) {
    if (!fm.mask[slot]) continue;
    auto [read, version] = index.read_slot(slot, [&](const SlotView& v) {
      return std::pair{matched_bits(query_not, v.code), v.id};
    });
    coarse.push_back({static_cast<std::uint32_t>(slot), read.first, version, read.second});
  }
  const std::size_t kept = v3_keep_count(query.keep_fraction, coarse.size(), query.k);
  auto by_bits = [](const Coarse& a, const Coarse& b) {
    return a.matched > b.matched || (a.matched == b.matched && a.slot < b.slot);
  };
  if (coarse.size() > kept) {
    std::nth_element(coarse.begin(), coarse.begin() + static_cast<std::ptrdiff_t>(kept),
                     coarse.end(), by_bits);
    coarse.resize(kept);
  }
  t.kept = coarse.size();
  t.quant_ms = ms_since(stage);

  stage = Clock::now();
  std::vector<ScoredSlot> candidates;
  candidates.reserve(coarse.size());
  std::vector<std::uint64_t> ids(fm.mask.size());
  for (const auto& c : coarse) {
    if (query.rank_by_bits) {
      std::uint32_t matched = c.matched;
      std::uint64_t id = c.id;
      if (c.version != fm.versions[c.slot]) {
        auto [read, version] = index.read_slot(c.slot, [&](const SlotView& v) {
          return std::tuple{index.slot_passes(v, query.filter), matched_bits(query_not, v.code), v.id};
        });
        if (!std::get<0>(read)) continue;
        matched = std::get<1>(read);
        id = std::get<2>(read);
      }
      ids[c.slot] = id;
      candidates.push_back({c.slot, static_cast<float>(est_cosine(matched, params.bits))});
      continue;
    }
    auto [read, version] = index.read_slot(c.slot, [&](const SlotView& v) {
      return ScoreRead{prepared->score(v.embedding), v.id};
    });
    ++t.scored;
    if (version != fm.versions[c.slot]) {
      const JointRead j = read_joint(index, c.slot, query.filter, *prepared);
      if (!j.pass) continue;
      read = {j.score, j.id};
    }
    ids[c.slot] = read.id;
    candidates.push_back({c.slot, read.score});
  }
  t.score_ms = ms_since(stage);

  stage = Clock::now();
  select_top(candidates, query.k);
  t.topk_ms = ms_since(stage);
  return finish(std::move(candidates), ids, fm.pass_count, t, start);
}

RetrievalResult run_query(const Index& index, const Query& query, const Scorer& scorer) {
  switch (query.algo) {
    case Algo::kV1: return query_v1(index, query, scorer);
    case Algo::kV2: return query_v2(index, query, scorer);
    case Algo::kV3: return query_v3(index, query, scorer);
  }
  fail(ErrorCode::kUnsupported, "unknown algo");
}

std::vector<RetrievalResult> run_batch(const Index& index, std::span<const Query> queries,
                                       const Scorer& scorer, std::size_t threads) {
  std::vector<RetrievalResult> results(queries.size());
  std::vector<std::exception_ptr> errors(queries.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, queries.size()));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < queries.size(); i += workers) {
      try {
        results[i] = run_query(index, queries[i], scorer);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

double estimate_pass_rate(const Index& index, const QueryFilter& filter, std::size_t sample) {
  check_filter_arity(index.clauses(), filter);
  const std::size_t hwm = index.high_water_mark();
  if (hwm == 0 || sample == 0) return 0.0;
  const std::size_t step = std::max<std::size_t>(1, hwm / sample);
  std::size_t live = 0;
  std::size_t pass = 0;
  for (std::size_t slot = 0; slot < hwm; slot += step) {
    auto [r, version] = index.read_slot(slot, [&](const SlotView& v) {
      return std::pair{v.live, index.slot_passes(v, filter)};
    });
    live += r.first;
    pass += r.second;
  }
  return live == 0 ? 0.0 : static_cast<double>(pass) / static_cast<double>(live);
}

Algo choose_algo(const Index& index, const QueryFilter& filter, double threshold) {
  return estimate_pass_rate(index, filter) < threshold ? Algo::kV2 : Algo::kV1;
}

}  // namespace linr
