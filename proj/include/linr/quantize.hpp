#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace linr {

/// Parameters of the Sign-OPORP sketch: permute, flip signs with a Rademacher
/// vector, sum contiguous bins, keep the sign of every bin.
///
/// One round holds `bins_per_round` bins over all `dim` coordinates. When the
/// code has no more bits than the embedding has coordinates there is exactly
/// one round with `bits` bins. Wider codes are built from several independent
/// rounds of at most 64 bins, each bin covering at least two coordinates, so
/// every extra round adds fresh projections instead of repeating single
/// coordinate signs.
struct OporpParams {
  std::size_t dim = 0;
  std::uint32_t bits = 0;
  std::uint32_t rounds = 0;
  std::uint32_t bins_per_round = 0;
  std::vector<std::vector<std::uint32_t>> permutation;  // [round][position] -> coordinate
  std::vector<std::vector<float>> rademacher;           // [round][position] -> +1 / -1

  static OporpParams make(std::size_t dim, std::uint32_t bits, std::uint64_t seed);

  std::size_t words() const { return bits / 64; }

  /// Half-open coordinate range [begin, end) of bin `bin` in permuted order.
  /// Lengths differ by at most one, which is the same as zero padding the
  /// short bins.
  std::pair<std::size_t, std::size_t> bin_range(std::uint32_t bin) const {
    return {bin * dim / bins_per_round, (bin + 1) * dim / bins_per_round};
  }
};

/// Packed code: bit b lives in word b / 64 at position b % 64 (LSB first).
using BitCode = std::vector<std::uint64_t>;

/// Writes the code of `embedding` into `out` (params.words() words).
/// sign(0) is taken as +, so an all-zero bin yields bit 1.
void oporp_encode(const OporpParams& params, std::span<const float> embedding,
                  std::span<std::uint64_t> out);

BitCode oporp_encode(const OporpParams& params, std::span<const float> embedding);

/// Bitwise NOT of a code, precomputed once per query.
BitCode negate(std::span<const std::uint64_t> code);

/// Number of agreeing bit positions given the negation of one side:
/// popcount(~a ^ b) == popcount(~(a ^ b)).
std::uint32_t matched_bits(std::span<const std::uint64_t> code_a_negated,
                           std::span<const std::uint64_t> code_b);

/// cos(pi * (1 - m / k)); strictly increasing in m.
double est_cosine(std::uint32_t matched, std::uint32_t bits);

}  // namespace linr
