#include <gtest/gtest.h>

#include "linr/config.hpp"
#include "linr/error.hpp"

namespace linr {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no linr::Error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(IndexConfig, RejectsBadShapes) {
  IndexConfig c{.capacity = 10, .dim = 8};
  EXPECT_NO_THROW(c.validate());

  auto broken = c;
  broken.capacity = 0;
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kInvalidArgument);
  broken = c;
  broken.dim = 0;
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kInvalidArgument);
  broken = c;
  broken.quant_bits = 100;
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kInvalidArgument);
  broken = c;
  broken.clause_schema = {{"a", Polarity::kMatch, 0}};
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kInvalidArgument);
  broken = c;
  broken.clause_schema = {{"a", Polarity::kMatch, 1}, {"a", Polarity::kReverseMatch, 1}};
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(IndexConfig, ClauseIndexByName) {
  IndexConfig c{.capacity = 1, .dim = 1, .clause_schema = {{"x"}, {"y"}}};
  EXPECT_EQ(c.clause_index("y"), 1u);
  EXPECT_EQ(code_of([&] { c.clause_index("z"); }), ErrorCode::kSchema);
}

TEST(MemoryFootprint, CountsEveryStore) {
  IndexConfig c{.capacity = 1000, .dim = 64, .clause_schema = {{"a", Polarity::kMatch, 3}}, .quant_bits = 128};
  const auto fp = estimate_footprint(c);
  EXPECT_EQ(fp.embedding_bytes, 1000u * 64 * 4);
  EXPECT_EQ(fp.clause_bytes, 1000u * (3 * 8 + 4));
  EXPECT_EQ(fp.code_bytes, 1000u * 16);
  EXPECT_EQ(fp.registry_bytes, 1000u * 13);
  EXPECT_EQ(fp.total(), fp.embedding_bytes + fp.clause_bytes + fp.code_bytes + fp.registry_bytes);
}

TEST(CompressionReport, SixtyFourDimHalfPrecisionIsSixteenfold) {
  const auto r = compression_report(1, 64, 2, 64);
  EXPECT_EQ(r.embedding_bytes, 128u);
  EXPECT_EQ(r.code_bytes, 8u);
  EXPECT_DOUBLE_EQ(r.ratio(), 16.0);
}

TEST(CompressionReport, BillionItemExtrapolation) {
  const auto r = compression_report(1'000'000'000ull, 64, 2, 64);
  EXPECT_EQ(r.embedding_bytes, 128'000'000'000ull);
  EXPECT_EQ(r.code_bytes, 8'000'000'000ull);
  const double gib = 1024.0 * 1024.0 * 1024.0;
  EXPECT_NEAR(r.embedding_bytes / gib, 120.0, 1.2);
  EXPECT_NEAR(r.code_bytes / gib, 7.5, 0.075);
}

TEST(CompressionReport, RejectsPartialWords) {
  EXPECT_EQ(code_of([] { compression_report(1, 64, 2, 32); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace linr
