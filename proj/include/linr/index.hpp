#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "linr/clause_filter.hpp"
#include "linr/config.hpp"
#include "linr/quantize.hpp"

namespace linr {

enum class ChangeKind : std::uint8_t { kUpsert, kDelete };

/// Unit of live update and of the change log.
struct ChangeRecord {
  ChangeKind kind = ChangeKind::kUpsert;
  std::uint64_t item_id = 0;
  std::vector<float> embedding;                     // upsert only
  std::vector<std::vector<std::uint64_t>> attrs;    // upsert only, schema order
  std::uint64_t seq = 0;

  static ChangeRecord upsert(std::uint64_t id, std::vector<float> embedding,
                             std::vector<std::vector<std::uint64_t>> attrs,
                             std::uint64_t seq = 0) {
    return {ChangeKind::kUpsert, id, std::move(embedding), std::move(attrs), seq};
  }
  static ChangeRecord erase(std::uint64_t id, std::uint64_t seq = 0) {
    return {ChangeKind::kDelete, id, {}, {}, seq};
  }

  bool operator==(const ChangeRecord&) const = default;
};

/// Throws kShape unless `record` is a well-formed upsert for `config`:
/// dim finite values and one list of at most max_attrs ids per clause.
void validate_upsert_record(const IndexConfig& config, const ChangeRecord& record);

/// Owned copy of one live item. Equality ignores the slot so that indexes
/// built along different paths (compacted snapshot vs. replay) compare equal.
struct ItemRecord {
  std::uint64_t id = 0;
  std::uint32_t slot = 0;
  std::vector<float> embedding;
  std::vector<std::vector<std::uint64_t>> attrs;
  BitCode code;

  bool operator==(const ItemRecord& o) const {
    return id == o.id && embedding == o.embedding && attrs == o.attrs && code == o.code;
  }
};

/// Read-only view of one slot, valid only inside Index::read_slot.
struct SlotView {
  std::size_t slot;
  bool live;
  std::uint64_t id;
  std::span<const float> embedding;
  std::span<const std::uint64_t> code;
  const ClauseStore* clauses;

  std::span<const std::uint64_t> attrs(std::size_t clause) const {
    return clauses->row(clause, slot);
  }
};

/// Filter evaluation over [0, high_water_mark): liveness AND every clause.
/// `versions` records the slot version each decision was taken against.
struct FilterMask {
  std::vector<std::uint8_t> mask;
  std::vector<std::uint32_t> versions;
  std::size_t pass_count = 0;
};

/// Mutable in-memory index with pre-allocated stores and a high-water mark.
///
/// One logical writer (upsert / erase, serialized internally) and any number
/// of concurrent readers. Every slot carries a sequence counter: the writer
/// makes it odd while rewriting the slot and even again when done, and a
/// reader re-runs its per-slot work whenever the counter moved underneath it.
/// A reader therefore observes a slot wholly before or wholly after a write
/// and never blocks the writer. Replacing an existing id rewrites its slot in
/// place, so the item never disappears from a concurrent scan.
class Index {
 public:
  /// Throws kInvalidArgument on a bad config and kAllocationRefused when the
  /// stores would exceed config.memory_budget_bytes.
  explicit Index(IndexConfig config);

  Index(const Index&) = delete;
  Index& operator=(const Index&) = delete;

  const IndexConfig& config() const { return config_; }
  const ClauseStore& clauses() const { return clauses_; }
  std::size_t dim() const { return config_.dim; }
  bool quantized() const { return oporp_.has_value(); }
  const OporpParams* oporp() const { return oporp_ ? &*oporp_ : nullptr; }
  std::size_t code_words() const { return config_.quant_bits / 64; }

  std::size_t high_water_mark() const { return hwm_.load(std::memory_order_acquire); }
  std::size_t live_count() const { return live_count_.load(std::memory_order_acquire); }
  std::uint64_t applied_seq() const { return applied_seq_.load(std::memory_order_acquire); }
  MemoryFootprint footprint() const { return estimate_footprint(config_); }

  // -- writer path --------------------------------------------------------

  /// Inserts or replaces; returns the slot. Throws kShape on a malformed
  /// record and kCapacityExhausted when no slot is free.
  std::uint32_t upsert(const ChangeRecord& record);
  std::uint32_t upsert(std::uint64_t id, std::span<const float> embedding,
                       std::vector<std::vector<std::uint64_t>> attrs);

  /// Tombstones `id`. Returns false if absent.
  bool erase(std::uint64_t id);

  /// Applies an upsert or delete and advances applied_seq to record.seq.
  void apply(const ChangeRecord& record);

  void set_applied_seq(std::uint64_t seq) { applied_seq_.store(seq, std::memory_order_release); }

  /// Blocks the writer path while held; used to capture snapshots.
  std::unique_lock<std::mutex> quiesce() const { return std::unique_lock(writer_mutex_); }

  /// Throws unless `record` is a well-formed upsert for this schema.
  void validate_upsert(const ChangeRecord& record) const {
    validate_upsert_record(config_, record);
  }

  // -- reader path --------------------------------------------------------

  std::uint32_t slot_version(std::size_t slot) const {
    return versions_[slot].load(std::memory_order_acquire);
  }

  /// Runs `fn(const SlotView&)` against a consistent version of `slot` and
  /// returns its result together with that version.
  template <class Fn>
  auto read_slot(std::size_t slot, Fn&& fn) const
      -> std::pair<std::invoke_result_t<Fn&, const SlotView&>, std::uint32_t> {
    for (;;) {
      const std::uint32_t before = versions_[slot].load(std::memory_order_acquire);
      if (before & 1u) {
        std::this_thread::yield();
        continue;
      }
      auto result = fn(view(slot));
      std::atomic_thread_fence(std::memory_order_acquire);
      if (versions_[slot].load(std::memory_order_relaxed) == before) {
        return {std::move(result), before};
      }
    }
  }

  bool contains(std::uint64_t id) const;
  std::optional<std::uint32_t> slot_of(std::uint64_t id) const;
  std::optional<ItemRecord> get(std::uint64_t id) const;

  /// Consistent copies of all live items in ascending slot order.
  std::vector<ItemRecord> export_live() const;

  /// Liveness AND clause filter over the working set.
  FilterMask eval_query_filter(const QueryFilter& filter) const;

  /// Single consistent filter decision for one slot.
  bool slot_passes(const SlotView& view, const QueryFilter& filter) const {
    return view.live && row_passes(clauses_, view.slot, filter);
  }

 private:
  SlotView view(std::size_t slot) const;
  ItemRecord copy_item(const SlotView& view) const;
  std::uint32_t claim_slot();
  void begin_write(std::size_t slot);
  void end_write(std::size_t slot);
  void write_row(std::size_t slot, std::uint64_t id, std::span<const float> embedding,
                 const std::vector<std::vector<std::uint64_t>>& attrs, const BitCode& code);

  IndexConfig config_;
  std::optional<OporpParams> oporp_;

  std::vector<float> embeddings_;
  ClauseStore clauses_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::uint64_t> slot_to_id_;
  std::vector<std::uint8_t> live_;
  std::unique_ptr<std::atomic<std::uint32_t>[]> versions_;

  std::atomic<std::size_t> hwm_{0};
  std::atomic<std::size_t> live_count_{0};
  std::atomic<std::uint64_t> applied_seq_{0};

  mutable std::mutex writer_mutex_;
  mutable std::shared_mutex id_map_mutex_;
  std::unordered_map<std::uint64_t, std::uint32_t> id_to_slot_;
  std::set<std::uint32_t> free_slots_;  // tombstoned slots below the high-water mark
};

std::unique_ptr<Index> create_index(IndexConfig config);

/// Live-item equality keyed by external id.
bool same_live_items(const Index& a, const Index& b);

}  // namespace linr
