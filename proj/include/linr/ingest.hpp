#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "linr/config.hpp"
#include "linr/index.hpp"

namespace linr {

// -- change log ---------------------------------------------------------------

/// One JSON object per line:
///   {"seq":N,"kind":"upsert","id":N,"emb":[...],"attrs":{"clause":[...]}}
///   {"seq":N,"kind":"delete","id":N}
/// Clauses absent from "attrs" are empty.
std::string to_json_line(const ChangeRecord& record, const IndexConfig& config);

/// Throws kParse on malformed JSON and kShape on schema violations.
ChangeRecord parse_change_record(std::string_view line, const IndexConfig& config);

struct LogScan {
  std::vector<ChangeRecord> records;
  std::size_t poison = 0;          // malformed lines skipped
  std::uint64_t end_offset = 0;    // byte offset just past the last complete line
  std::string last_error;
};

/// Reads complete lines from `offset` on. A trailing line without a newline is
/// left for a later read. A missing file reads as empty.
LogScan read_change_log(const std::filesystem::path& path, const IndexConfig& config,
                        std::uint64_t offset = 0);

/// Appends records with fresh, strictly increasing sequence numbers.
/// Thread-safe; every line is flushed before append() returns.
class ChangeLogWriter {
 public:
  ChangeLogWriter(std::filesystem::path path, IndexConfig config);

  /// Assigns record.seq and returns it.
  std::uint64_t append(ChangeRecord record);

  /// Appends `record` with its own seq, which must exceed every earlier one.
  void append_with_seq(const ChangeRecord& record);

  std::uint64_t last_seq() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_line(const ChangeRecord& record);

  std::filesystem::path path_;
  IndexConfig config_;
  mutable std::mutex mutex_;
  std::ofstream out_;
  std::uint64_t last_seq_ = 0;
};

// -- snapshot -------------------------------------------------------------------

enum class ValuePrecision : std::uint8_t { kF16 = 2, kF32 = 4 };

/// Binary snapshot, little-endian:
///   "LNRS" | version u32 | count u64 | dim u32 | quant_bits u32 |
///   clause count u16 | per clause: max_attrs u32, polarity u8, name (u16 + bytes) |
///   seq watermark u64 | precision u8 | seed u64 | weights ref (u16 + bytes) |
///   ids u64[count] | embeddings [count][dim] | per clause: counts u32[count],
///   attrs u64[count][max_attrs] (sentinel padded) | codes u64[count][quant_bits/64]
inline constexpr char kSnapshotMagic[4] = {'L', 'N', 'R', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct SnapshotHeader {
  std::uint32_t version = kSnapshotVersion;
  std::uint64_t count = 0;
  std::size_t dim = 0;
  std::uint32_t quant_bits = 0;
  std::vector<ClauseSpec> clauses;
  std::uint64_t seq_watermark = 0;
  ValuePrecision precision = ValuePrecision::kF32;
  std::uint64_t seed = 0;
  std::string weights_ref;
};

/// Serializes live items in slot order; tombstones are dropped. The writer
/// path is paused for the duration of the capture, readers are not.
std::vector<std::uint8_t> encode_snapshot(const Index& index, const std::string& weights_ref = {},
                                          ValuePrecision precision = ValuePrecision::kF32);

/// Returns the seq watermark written.
std::uint64_t write_snapshot(const Index& index, const std::filesystem::path& path,
                             const std::string& weights_ref = {},
                             ValuePrecision precision = ValuePrecision::kF32);

SnapshotHeader read_snapshot_header(const std::filesystem::path& path);

/// Throws kParse (magic, version, truncation), kSchema (config mismatch,
/// naming the field) or kCorruption (stored codes disagree with the data).
std::unique_ptr<Index> decode_snapshot(const std::vector<std::uint8_t>& bytes,
                                       const IndexConfig& config);
std::unique_ptr<Index> load_snapshot(const std::filesystem::path& path, const IndexConfig& config);

// -- bootstrap ----------------------------------------------------------------

struct BootstrapResult {
  std::unique_ptr<Index> index;
  std::uint64_t snapshot_watermark = 0;
  std::uint64_t log_offset = 0;  // where an updator should resume tailing
  std::size_t applied = 0;
  std::size_t poison = 0;
};

/// Loads the snapshot if given (and present), then replays every log record
/// with seq above its watermark. Throws kCorruption on a seq regression or
/// duplicate.
BootstrapResult bootstrap(const std::optional<std::filesystem::path>& snapshot,
                          const std::filesystem::path& changelog, const IndexConfig& config);

// -- updator ------------------------------------------------------------------

/// Tails the change log and applies new records through the index writer
/// path. Malformed or inapplicable records bump the poison counter and are
/// skipped; serving never stops on bad input.
class Updator {
 public:
  Updator(Index& index, std::filesystem::path changelog, std::uint64_t start_offset = 0,
          std::chrono::milliseconds poll_interval = std::chrono::milliseconds(5));
  ~Updator();

  Updator(const Updator&) = delete;
  Updator& operator=(const Updator&) = delete;

  void start();
  void stop();

  /// One tailing pass; returns the number of records applied.
  std::size_t poll_once();

  std::uint64_t applied_seq() const { return index_.applied_seq(); }
  std::size_t applied_count() const { return applied_.load(); }
  std::size_t poison_count() const { return poison_.load(); }
  std::string last_error() const;

  /// Waits until applied_seq() >= seq.
  bool wait_for_seq(std::uint64_t seq, std::chrono::milliseconds timeout);

 private:
  void run(std::stop_token stop);

  Index& index_;
  std::filesystem::path path_;
  std::uint64_t offset_;
  std::chrono::milliseconds poll_;
  std::atomic<std::size_t> applied_{0};
  std::atomic<std::size_t> poison_{0};
  mutable std::mutex mutex_;  // guards offset_, last_error_, poll serialization
  std::condition_variable_any applied_cv_;
  std::string last_error_;
  std::jthread thread_;
};

/// Blocking form: tails `changelog` into `index` until `stop` is requested.
void run_updator(Index& index, const std::filesystem::path& changelog, std::uint64_t start_offset,
                 std::chrono::milliseconds poll_interval, std::stop_token stop);

}  // namespace linr
