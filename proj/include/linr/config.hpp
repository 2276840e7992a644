#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace linr {

enum class Polarity : std::uint8_t { kMatch = 0, kReverseMatch = 1 };

struct ClauseSpec {
  std::string name;
  Polarity polarity = Polarity::kMatch;
  std::uint32_t max_attrs = 1;

  bool operator==(const ClauseSpec&) const = default;
};

// 16 GiB; create_index refuses configurations whose stores exceed this.
inline constexpr std::uint64_t kDefaultMemoryBudget = 16ull << 30;

struct IndexConfig {
  std::size_t capacity = 0;
  std::size_t dim = 0;
  std::vector<ClauseSpec> clause_schema;
  std::uint32_t quant_bits = 0;  // 0 disables quantization
  std::uint64_t seed = 0;
  std::uint64_t memory_budget_bytes = kDefaultMemoryBudget;

  /// Throws linr::Error(kInvalidArgument) when an invariant is violated.
  void validate() const;

  std::size_t clause_index(const std::string& name) const;
};

/// Byte accounting of the pre-allocated stores.
struct MemoryFootprint {
  std::uint64_t embedding_bytes = 0;
  std::uint64_t clause_bytes = 0;
  std::uint64_t code_bytes = 0;
  std::uint64_t registry_bytes = 0;

  std::uint64_t total() const {
    return embedding_bytes + clause_bytes + code_bytes + registry_bytes;
  }
};

MemoryFootprint estimate_footprint(const IndexConfig& config);

/// Compression of `bytes_per_value`-wide embeddings of `dim` coordinates into
/// `bits`-bit sign codes.
struct CompressionReport {
  std::uint64_t items = 0;
  std::size_t dim = 0;
  std::size_t bytes_per_value = 0;
  std::uint32_t bits = 0;
  std::uint64_t embedding_bytes = 0;
  std::uint64_t code_bytes = 0;

  double ratio() const {
    return static_cast<double>(embedding_bytes) / static_cast<double>(code_bytes);
  }
};

CompressionReport compression_report(std::uint64_t items, std::size_t dim,
                                     std::size_t bytes_per_value, std::uint32_t bits);

}  // namespace linr
