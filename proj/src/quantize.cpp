#include "linr/quantize.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "linr/error.hpp"
#include "linr/rng.hpp"

namespace linr {

namespace {

std::uint32_t bins_for(std::size_t dim, std::uint32_t bits) {
  if (bits <= dim) return bits;
  const std::size_t half = dim / 2 > 0 ? dim / 2 : 1;
  const std::uint32_t pow2 = static_cast<std::uint32_t>(std::bit_floor(half));
  return pow2 < 64 ? pow2 : 64;
}

}  // namespace

OporpParams OporpParams::make(std::size_t dim, std::uint32_t bits, std::uint64_t seed) {
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "oporp: dim must be >= 1");
  if (bits == 0 || bits % 64 != 0) {
    fail(ErrorCode::kInvalidArgument, "oporp: bits must be a positive multiple of 64");
  }
  OporpParams p;
  p.dim = dim;
  p.bits = bits;
  p.bins_per_round = bins_for(dim, bits);
  p.rounds = bits / p.bins_per_round;

  Rng rng(seed ^ 0x4F504F5250ull);
  p.permutation.resize(p.rounds);
  p.rademacher.resize(p.rounds);
  for (std::uint32_t r = 0; r < p.rounds; ++r) {
    auto& perm = p.permutation[r];
    perm.resize(dim);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = dim - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    auto& signs = p.rademacher[r];
    signs.resize(dim);
    for (auto& s : signs) s = rng.coin() ? 1.0f : -1.0f;
  }
  return p;
}

void oporp_encode(const OporpParams& params, std::span<const float> embedding,
                  std::span<std::uint64_t> out) {
  if (embedding.size() != params.dim) {
    fail(ErrorCode::kShape, "oporp: embedding has " + std::to_string(embedding.size()) +
                                " coordinates, expected " + std::to_string(params.dim));
  }
  if (out.size() != params.words()) fail(ErrorCode::kShape, "oporp: output word count mismatch");
  for (float v : embedding) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "oporp: non-finite embedding value");
  }
  std::fill(out.begin(), out.end(), 0);
  std::uint32_t bit = 0;
  for (std::uint32_t r = 0; r < params.rounds; ++r) {
    const auto& perm = params.permutation[r];
    const auto& signs = params.rademacher[r];
    for (std::uint32_t b = 0; b < params.bins_per_round; ++b, ++bit) {
      const auto [begin, end] = params.bin_range(b);
      double sum = 0.0;
      for (std::size_t j = begin; j < end; ++j) {
        sum += static_cast<double>(signs[j]) * embedding[perm[j]];
      }
      if (sum >= 0.0) out[bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
  }
}

BitCode oporp_encode(const OporpParams& params, std::span<const float> embedding) {
  BitCode code(params.words());
  oporp_encode(params, embedding, code);
  return code;
}

BitCode negate(std::span<const std::uint64_t> code) {
  BitCode out(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) out[i] = ~code[i];
  return out;
}

std::uint32_t matched_bits(std::span<const std::uint64_t> code_a_negated,
                           std::span<const std::uint64_t> code_b) {
  if (code_a_negated.size() != code_b.size()) {
    fail(ErrorCode::kShape, "matched_bits: code length mismatch");
  }
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < code_b.size(); ++i) {
    m += static_cast<std::uint32_t>(std::popcount(code_a_negated[i] ^ code_b[i]));
  }
  return m;
}

double est_cosine(std::uint32_t matched, std::uint32_t bits) {
  if (bits == 0 || matched > bits) fail(ErrorCode::kInvalidArgument, "est_cosine: need 0 <= m <= k");
  // cos(pi * (1 - t)) == sin(pi * (t - 1/2)); the sine form is exact at t = 0, 1/2, 1.
  const double t = static_cast<double>(matched) / bits;
  return std::sin(std::numbers::pi * (t - 0.5));
}

}  // namespace linr
