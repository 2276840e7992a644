#include <gtest/gtest.h>

#include <random>
#include <set>

#include "linr/clause_filter.hpp"
#include "linr/error.hpp"
#include "test_util.hpp"

namespace linr {
namespace {

using Ids = std::vector<std::uint64_t>;

TEST(NormalizeAttrs, SortsAndDeduplicates) {
  Ids a = {5, 1, 5, 3, 1};
  normalize_attrs(a);
  EXPECT_EQ(a, (Ids{1, 3, 5}));
}

TEST(SortedIntersects, AgreesWithSetIntersection) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 2000; ++t) {
    const auto a = testing::random_attrs(gen, 30, 6);
    const auto b = testing::random_attrs(gen, 30, 6);
    std::set<std::uint64_t> sa(a.begin(), a.end());
    bool expected = false;
    for (auto x : b) expected = expected || sa.contains(x);
    EXPECT_EQ(sorted_intersects(a, b), expected);
  }
}

TEST(ClausePasses, MatchAndReverseSemantics) {
  const Ids item = {2, 7};
  EXPECT_TRUE(clause_passes(item, Ids{7, 9}, Polarity::kMatch));
  EXPECT_FALSE(clause_passes(item, Ids{8, 9}, Polarity::kMatch));
  EXPECT_FALSE(clause_passes(item, Ids{7, 9}, Polarity::kReverseMatch));
  EXPECT_TRUE(clause_passes(item, Ids{8, 9}, Polarity::kReverseMatch));
  // empty query clause is disabled
  EXPECT_TRUE(clause_passes(item, Ids{}, Polarity::kMatch));
  EXPECT_TRUE(clause_passes(item, Ids{}, Polarity::kReverseMatch));
  // item without attributes
  EXPECT_FALSE(clause_passes(Ids{}, Ids{1}, Polarity::kMatch));
  EXPECT_TRUE(clause_passes(Ids{}, Ids{1}, Polarity::kReverseMatch));
}

TEST(ClauseStore, RowsArePaddedWithSentinel) {
  ClauseStore store({{"a", Polarity::kMatch, 3}}, 4);
  store.set_row(0, 2, Ids{4, 9});
  EXPECT_EQ(Ids(store.row(0, 2).begin(), store.row(0, 2).end()), (Ids{4, 9}));
  const auto padded = store.padded_row(0, 2);
  EXPECT_EQ(Ids(padded.begin(), padded.end()), (Ids{4, 9, kAttrSentinel}));
  store.set_row(0, 2, Ids{1});
  EXPECT_EQ(Ids(store.padded_row(0, 2).begin(), store.padded_row(0, 2).end()),
            (Ids{1, kAttrSentinel, kAttrSentinel}));
  EXPECT_TRUE(store.row(0, 0).empty());
}

TEST(EvalClause, FigureOneStyleCase) {
  // clause 0 Match on location, clause 1 ReverseMatch on already-applied ids
  ClauseStore store({{"loc", Polarity::kMatch, 2}, {"applied", Polarity::kReverseMatch, 2}}, 5);
  store.set_row(0, 0, Ids{1});
  store.set_row(0, 1, Ids{1, 2});
  store.set_row(0, 2, Ids{3});
  store.set_row(0, 3, Ids{2});
  store.set_row(0, 4, Ids{});
  store.set_row(1, 0, Ids{100});
  store.set_row(1, 1, Ids{});
  store.set_row(1, 2, Ids{});
  store.set_row(1, 3, Ids{100, 101});
  store.set_row(1, 4, Ids{});
  EXPECT_EQ(eval_clause(store, 0, Ids{1, 2}, 5), (std::vector<std::uint8_t>{1, 1, 0, 1, 0}));
  EXPECT_EQ(eval_clause(store, 1, Ids{100}, 5), (std::vector<std::uint8_t>{0, 1, 1, 0, 1}));
  const auto filter = QueryFilter::normalized({{2, 1}, {100}});
  std::vector<bool> rows;
  for (std::size_t s = 0; s < 5; ++s) rows.push_back(row_passes(store, s, filter));
  EXPECT_EQ(rows, (std::vector<bool>{false, true, false, false, false}));
}

TEST(EvalClause, RespectsHighWaterMark) {
  ClauseStore store({{"a", Polarity::kMatch, 1}}, 10);
  EXPECT_EQ(eval_clause(store, 0, Ids{1}, 3).size(), 3u);
}

TEST(EvalClause, Errors) {
  ClauseStore store({{"a", Polarity::kMatch, 1}}, 2);
  EXPECT_THROW(eval_clause(store, 1, Ids{}, 2), Error);
  EXPECT_THROW(eval_clause(store, 0, Ids{3, 1}, 2), Error);
  EXPECT_THROW(check_filter_arity(store, QueryFilter::pass_all(2)), Error);
  EXPECT_NO_THROW(check_filter_arity(store, QueryFilter::pass_all(1)));
}

}  // namespace
}  // namespace linr
