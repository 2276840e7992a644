#include "linr/clause_filter.hpp"

#include <algorithm>
#include <string>

#include "linr/error.hpp"

namespace linr {

ClauseStore::ClauseStore(std::vector<ClauseSpec> schema, std::size_t capacity)
    : capacity_(capacity) {
  clauses_.reserve(schema.size());
  for (auto& spec : schema) {
    Clause clause;
    clause.attrs.assign(capacity * spec.max_attrs, kAttrSentinel);
    clause.counts.assign(capacity, 0);
    clause.spec = std::move(spec);
    clauses_.push_back(std::move(clause));
  }
}

std::span<const std::uint64_t> ClauseStore::row(std::size_t clause, std::size_t slot) const {
  const auto& c = clauses_[clause];
  return {c.attrs.data() + slot * c.spec.max_attrs, c.counts[slot]};
}

std::span<const std::uint64_t> ClauseStore::padded_row(std::size_t clause, std::size_t slot) const {
  const auto& c = clauses_[clause];
  return {c.attrs.data() + slot * c.spec.max_attrs, c.spec.max_attrs};
}

void ClauseStore::set_row(std::size_t clause, std::size_t slot,
                          std::span<const std::uint64_t> attrs) {
  auto& c = clauses_[clause];
  const std::size_t width = c.spec.max_attrs;
  std::uint64_t* out = c.attrs.data() + slot * width;
  std::copy(attrs.begin(), attrs.end(), out);
  std::fill(out + attrs.size(), out + width, kAttrSentinel);
  c.counts[slot] = static_cast<std::uint32_t>(attrs.size());
}

void normalize_attrs(std::vector<std::uint64_t>& attrs) {
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
}

QueryFilter QueryFilter::normalized(std::vector<std::vector<std::uint64_t>> clauses) {
  for (auto& attrs : clauses) normalize_attrs(attrs);
  return QueryFilter{std::move(clauses)};
}

bool sorted_intersects(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

bool row_passes(const ClauseStore& store, std::size_t slot, const QueryFilter& filter) {
  for (std::size_t c = 0; c < store.num_clauses(); ++c) {
    if (!clause_passes(store.row(c, slot), filter.clauses[c], store.spec(c).polarity)) {
      return false;
    }
  }
  return true;
}

std::vector<std::uint8_t> eval_clause(const ClauseStore& store, std::size_t clause,
                                      std::span<const std::uint64_t> query_attrs,
                                      std::size_t high_water_mark) {
  if (clause >= store.num_clauses()) {
    fail(ErrorCode::kSchema, "clause index " + std::to_string(clause) + " out of range");
  }
  if (!std::is_sorted(query_attrs.begin(), query_attrs.end())) {
    fail(ErrorCode::kInvalidArgument, "query attributes must be sorted ascending");
  }
  const Polarity polarity = store.spec(clause).polarity;
  std::vector<std::uint8_t> mask(high_water_mark);
  for (std::size_t slot = 0; slot < high_water_mark; ++slot) {
    mask[slot] = clause_passes(store.row(clause, slot), query_attrs, polarity) ? 1 : 0;
  }
  return mask;
}

void check_filter_arity(const ClauseStore& store, const QueryFilter& filter) {
  if (filter.clauses.size() != store.num_clauses()) {
    fail(ErrorCode::kSchema, "filter has " + std::to_string(filter.clauses.size()) +
                                 " clauses, schema has " + std::to_string(store.num_clauses()));
  }
}

}  // namespace linr
