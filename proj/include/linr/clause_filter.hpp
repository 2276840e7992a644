#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "linr/config.hpp"

namespace linr {

/// Padding value of unused attribute cells.
inline constexpr std::uint64_t kAttrSentinel = std::numeric_limits<std::uint64_t>::max();

/// Per-clause padded attribute matrices plus per-item attribute counts.
///
/// Row `slot` of clause `c` holds the item's attributes sorted strictly
/// ascending in its first `count(c, slot)` cells; the remaining cells carry
/// kAttrSentinel. Rows are fixed width (`max_attrs`) so the scan needs no
/// offset vector.
class ClauseStore {
 public:
  ClauseStore() = default;
  ClauseStore(std::vector<ClauseSpec> schema, std::size_t capacity);

  std::size_t num_clauses() const { return clauses_.size(); }
  std::size_t capacity() const { return capacity_; }
  const ClauseSpec& spec(std::size_t clause) const { return clauses_[clause].spec; }

  std::uint32_t count(std::size_t clause, std::size_t slot) const {
    return clauses_[clause].counts[slot];
  }

  /// The occupied prefix of a row.
  std::span<const std::uint64_t> row(std::size_t clause, std::size_t slot) const;

  /// The full padded row, sentinel cells included.
  std::span<const std::uint64_t> padded_row(std::size_t clause, std::size_t slot) const;

  /// `attrs` must already be sorted, duplicate-free and at most max_attrs long.
  void set_row(std::size_t clause, std::size_t slot, std::span<const std::uint64_t> attrs);

 private:
  struct Clause {
    ClauseSpec spec;
    std::vector<std::uint64_t> attrs;
    std::vector<std::uint32_t> counts;
  };

  std::size_t capacity_ = 0;
  std::vector<Clause> clauses_;
};

/// Sorts and de-duplicates in place.
void normalize_attrs(std::vector<std::uint64_t>& attrs);

/// Query-side attribute lists, one per schema clause in schema order. An empty
/// list disables its clause.
struct QueryFilter {
  std::vector<std::vector<std::uint64_t>> clauses;

  /// Normalizes every list (sort + dedupe).
  static QueryFilter normalized(std::vector<std::vector<std::uint64_t>> clauses);

  /// A filter with every clause disabled.
  static QueryFilter pass_all(std::size_t num_clauses) {
    return QueryFilter{std::vector<std::vector<std::uint64_t>>(num_clauses)};
  }
};

/// True iff two ascending lists share an element; linear merge that stops at
/// the first common value.
bool sorted_intersects(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// One clause decision for one item.
/// Match passes on a non-empty intersection, ReverseMatch on an empty one, and
/// an empty query list passes regardless of polarity.
inline bool clause_passes(std::span<const std::uint64_t> item_attrs,
                          std::span<const std::uint64_t> query_attrs, Polarity polarity) {
  if (query_attrs.empty()) return true;
  const bool hit = sorted_intersects(item_attrs, query_attrs);
  return polarity == Polarity::kMatch ? hit : !hit;
}

/// Conjunction of all clauses for one slot (liveness not included).
/// The filter must match the store's arity.
bool row_passes(const ClauseStore& store, std::size_t slot, const QueryFilter& filter);

/// 0/1 mask of one clause over slots [0, high_water_mark). `query_attrs` must
/// be sorted ascending.
std::vector<std::uint8_t> eval_clause(const ClauseStore& store, std::size_t clause,
                                      std::span<const std::uint64_t> query_attrs,
                                      std::size_t high_water_mark);

/// Throws kSchema if the filter arity differs from the schema.
void check_filter_arity(const ClauseStore& store, const QueryFilter& filter);

}  // namespace linr
