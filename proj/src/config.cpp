#include "linr/config.hpp"

#include <set>

#include "linr/error.hpp"

namespace linr {

void IndexConfig::validate() const {
  if (capacity < 1) fail(ErrorCode::kInvalidArgument, "capacity must be >= 1");
  if (dim < 1) fail(ErrorCode::kInvalidArgument, "dim must be >= 1");
  if (quant_bits % 64 != 0) {
    fail(ErrorCode::kInvalidArgument, "quant_bits must be a multiple of 64");
  }
  if (capacity > std::uint64_t{0xFFFFFFFF}) {
    fail(ErrorCode::kInvalidArgument, "capacity exceeds 32-bit slot space");
  }
  std::set<std::string> names;
  for (const auto& clause : clause_schema) {
    if (clause.max_attrs < 1) {
      fail(ErrorCode::kInvalidArgument, "clause '" + clause.name + "': max_attrs must be >= 1");
    }
    if (!names.insert(clause.name).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate clause name '" + clause.name + "'");
    }
  }
}

std::size_t IndexConfig::clause_index(const std::string& name) const {
  for (std::size_t c = 0; c < clause_schema.size(); ++c) {
    if (clause_schema[c].name == name) return c;
  }
  fail(ErrorCode::kSchema, "unknown clause '" + name + "'");
}

MemoryFootprint estimate_footprint(const IndexConfig& config) {
  MemoryFootprint fp;
  const std::uint64_t cap = config.capacity;
  fp.embedding_bytes = cap * config.dim * sizeof(float);
  for (const auto& clause : config.clause_schema) {
    fp.clause_bytes += cap * (clause.max_attrs * sizeof(std::uint64_t) + sizeof(std::uint32_t));
  }
  fp.code_bytes = cap * (config.quant_bits / 8);
  // slot -> id, liveness, seqlock version
  fp.registry_bytes = cap * (sizeof(std::uint64_t) + 1 + sizeof(std::uint32_t));
  return fp;
}

CompressionReport compression_report(std::uint64_t items, std::size_t dim,
                                     std::size_t bytes_per_value, std::uint32_t bits) {
  if (bits == 0 || bits % 64 != 0) {
    fail(ErrorCode::kInvalidArgument, "bits must be a positive multiple of 64");
  }
  CompressionReport r;
  r.items = items;
  r.dim = dim;
  r.bytes_per_value = bytes_per_value;
  r.bits = bits;
  r.embedding_bytes = items * dim * bytes_per_value;
  r.code_bytes = items * (bits / 8);
  return r;
}

}  // namespace linr
