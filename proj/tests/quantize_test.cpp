#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "linr/error.hpp"
#include "linr/quantize.hpp"
#include "test_util.hpp"

namespace linr {
namespace {

// Independent reference: bins by scanning permuted positions, bit vector of bools.
std::vector<bool> reference_bits(const OporpParams& p, const std::vector<float>& x) {
  std::vector<bool> bits;
  for (std::uint32_t r = 0; r < p.rounds; ++r) {
    std::vector<double> sums(p.bins_per_round, 0.0);
    for (std::size_t j = 0; j < p.dim; ++j) {
      // bin b covers [floor(b*D/B), floor((b+1)*D/B))
      std::size_t b = 0;
      while (!((b * p.dim) / p.bins_per_round <= j && j < ((b + 1) * p.dim) / p.bins_per_round)) ++b;
      sums[b] += static_cast<double>(p.rademacher[r][j]) * x[p.permutation[r][j]];
    }
    for (double s : sums) bits.push_back(s >= 0.0);
  }
  return bits;
}

std::vector<bool> unpack(const BitCode& code, std::uint32_t bits) {
  std::vector<bool> out;
  for (std::uint32_t b = 0; b < bits; ++b) out.push_back(((code[b / 64] >> (b % 64)) & 1u) != 0);
  return out;
}

TEST(OporpParams, SingleRoundWhenBitsFitDim) {
  const auto p = OporpParams::make(128, 128, 1);
  EXPECT_EQ(p.rounds, 1u);
  EXPECT_EQ(p.bins_per_round, 128u);
  const auto q = OporpParams::make(256, 64, 1);
  EXPECT_EQ(q.rounds, 1u);
  EXPECT_EQ(q.bins_per_round, 64u);
}

TEST(OporpParams, WideCodesUseSeveralRounds) {
  const auto p = OporpParams::make(128, 512, 1);
  EXPECT_EQ(p.bins_per_round, 64u);
  EXPECT_EQ(p.rounds, 8u);
  const auto small = OporpParams::make(16, 128, 1);
  EXPECT_EQ(small.bins_per_round, 8u);
  EXPECT_EQ(small.rounds, 16u);
  const auto one = OporpParams::make(1, 64, 1);
  EXPECT_EQ(one.bins_per_round, 1u);
  EXPECT_EQ(one.rounds, 64u);
}

TEST(OporpParams, PermutationsAndSignsAreValid) {
  const auto p = OporpParams::make(100, 256, 3);
  for (std::uint32_t r = 0; r < p.rounds; ++r) {
    std::set<std::uint32_t> seen(p.permutation[r].begin(), p.permutation[r].end());
    EXPECT_EQ(seen.size(), 100u);
    EXPECT_EQ(*seen.rbegin(), 99u);
    for (float s : p.rademacher[r]) EXPECT_TRUE(s == 1.0f || s == -1.0f);
  }
}

TEST(OporpParams, BinsPartitionCoordinatesEvenly) {
  const auto p = OporpParams::make(100, 64, 3);
  std::size_t covered = 0;
  for (std::uint32_t b = 0; b < p.bins_per_round; ++b) {
    const auto [begin, end] = p.bin_range(b);
    EXPECT_EQ(begin, covered);
    EXPECT_TRUE(end - begin == 1 || end - begin == 2);
    covered = end;
  }
  EXPECT_EQ(covered, 100u);
}

TEST(OporpParams, SeedDeterminesEverything) {
  const auto a = OporpParams::make(64, 128, 9);
  const auto b = OporpParams::make(64, 128, 9);
  const auto c = OporpParams::make(64, 128, 10);
  EXPECT_EQ(a.permutation, b.permutation);
  EXPECT_EQ(a.rademacher, b.rademacher);
  EXPECT_NE(a.permutation, c.permutation);
}

TEST(OporpParams, RejectsBadArguments) {
  EXPECT_THROW(OporpParams::make(0, 64, 1), Error);
  EXPECT_THROW(OporpParams::make(8, 0, 1), Error);
  EXPECT_THROW(OporpParams::make(8, 96, 1), Error);
}

TEST(OporpEncode, MatchesReferenceOnRandomInputs) {
  std::mt19937_64 gen(11);
  for (auto [dim, bits] : std::vector<std::pair<std::size_t, std::uint32_t>>{
           {64, 64}, {100, 64}, {128, 128}, {128, 512}, {16, 256}, {3, 64}}) {
    const auto p = OporpParams::make(dim, bits, dim * 31 + bits);
    for (int t = 0; t < 20; ++t) {
      const auto x = testing::random_vector(gen, dim);
      EXPECT_EQ(unpack(oporp_encode(p, x), bits), reference_bits(p, x)) << dim << "x" << bits;
    }
  }
}

TEST(OporpEncode, BasisVectorHasOneInformativeBit) {
  // With single-coordinate bins, e_i only moves the bin holding coordinate i;
  // every other bin sums to zero and reads as +.
  const auto p = OporpParams::make(64, 64, 5);
  for (std::uint32_t i = 0; i < 64; ++i) {
    std::vector<float> e(64, 0.0f);
    e[i] = 1.0f;
    const auto code = oporp_encode(p, e);
    std::uint32_t pos = 0;
    while (p.permutation[0][pos] != i) ++pos;
    std::uint64_t expected = ~std::uint64_t{0};
    if (p.rademacher[0][pos] < 0) expected &= ~(std::uint64_t{1} << pos);
    EXPECT_EQ(code[0], expected);
  }
}

TEST(OporpEncode, ZeroVectorIsAllOnes) {
  const auto p = OporpParams::make(32, 128, 5);
  const auto code = oporp_encode(p, std::vector<float>(32, 0.0f));
  for (auto w : code) EXPECT_EQ(w, ~std::uint64_t{0});
}

TEST(OporpEncode, ScaleInvariant) {
  std::mt19937_64 gen(3);
  const auto p = OporpParams::make(48, 128, 5);
  const auto x = testing::random_vector(gen, 48);
  auto y = x;
  for (auto& v : y) v *= 4.0f;
  EXPECT_EQ(oporp_encode(p, x), oporp_encode(p, y));
}

TEST(OporpEncode, RejectsBadInput) {
  const auto p = OporpParams::make(8, 64, 1);
  EXPECT_THROW(oporp_encode(p, std::vector<float>(7, 1.0f)), Error);
  std::vector<float> bad(8, 1.0f);
  bad[3] = std::nanf("");
  EXPECT_THROW(oporp_encode(p, bad), Error);
  bad[3] = INFINITY;
  EXPECT_THROW(oporp_encode(p, bad), Error);
}

TEST(MatchedBits, CountsAgreeingPositions) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    BitCode a = {gen(), gen(), gen()};
    BitCode b = {gen(), gen(), gen()};
    std::uint32_t expected = 0;
    for (int bit = 0; bit < 192; ++bit) {
      expected += ((a[bit / 64] >> (bit % 64)) & 1u) == ((b[bit / 64] >> (bit % 64)) & 1u);
    }
    EXPECT_EQ(matched_bits(negate(a), b), expected);
  }
  BitCode a = {0x0F};
  EXPECT_EQ(matched_bits(negate(a), a), 64u);
  EXPECT_EQ(matched_bits(negate(a), negate(a)), 0u);
  EXPECT_THROW(matched_bits(negate(a), BitCode{1, 2}), Error);
}

TEST(EstCosine, EndpointsAndMidpoints) {
  EXPECT_EQ(est_cosine(512, 512), 1.0);
  EXPECT_EQ(est_cosine(0, 512), -1.0);
  EXPECT_EQ(est_cosine(256, 512), 0.0);
  EXPECT_NEAR(est_cosine(384, 512), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(est_cosine(128, 512), -std::sqrt(0.5), 1e-15);
  EXPECT_THROW(est_cosine(65, 64), Error);
  EXPECT_THROW(est_cosine(0, 0), Error);
}

TEST(EstCosine, StrictlyIncreasing) {
  for (std::uint32_t m = 0; m < 128; ++m) EXPECT_LT(est_cosine(m, 128), est_cosine(m + 1, 128));
}

TEST(EstCosine, IdenticalAndOpposedVectors) {
  std::mt19937_64 gen(8);
  const auto p = OporpParams::make(128, 256, 4);
  const auto x = testing::random_vector(gen, 128);
  auto neg = x;
  for (auto& v : neg) v = -v;
  const auto cx = oporp_encode(p, x);
  EXPECT_EQ(est_cosine(matched_bits(negate(cx), cx), 256), 1.0);
  // Random Gaussian bins are never exactly zero, so every sign flips.
  EXPECT_EQ(est_cosine(matched_bits(negate(cx), oporp_encode(p, neg)), 256), -1.0);
}

TEST(EstCosine, TracksCosineOnCorrelatedPairs) {
  std::mt19937_64 gen(21);
  const std::size_t dim = 128;
  const auto p = OporpParams::make(dim, 512, 2);
  for (double target : {0.9, 0.5, 0.0, -0.5}) {
    double err = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
      const auto a = testing::unit_vector(gen, dim);
      auto r = testing::unit_vector(gen, dim);
      double proj = 0.0;
      for (std::size_t i = 0; i < dim; ++i) proj += static_cast<double>(a[i]) * r[i];
      std::vector<float> b(dim);
      double sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double orth = r[i] - proj * a[i];
        sq += orth * orth;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        b[i] = static_cast<float>(target * a[i] + std::sqrt(1 - target * target) * (r[i] - proj * a[i]) / std::sqrt(sq));
      }
      double truth = 0.0;
      for (std::size_t i = 0; i < dim; ++i) truth += static_cast<double>(a[i]) * b[i];
      const auto m = matched_bits(negate(oporp_encode(p, a)), oporp_encode(p, b));
      err += std::abs(est_cosine(m, 512) - truth);
    }
    EXPECT_LT(err / trials, 0.08) << "cosine " << target;
  }
}

}  // namespace
}  // namespace linr
