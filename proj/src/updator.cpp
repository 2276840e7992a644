#include <string>

#include "linr/error.hpp"
#include "linr/ingest.hpp"

namespace linr {

BootstrapResult bootstrap(const std::optional<std::filesystem::path>& snapshot,
                          const std::filesystem::path& changelog, const IndexConfig& config) {
  BootstrapResult result;
  if (snapshot && std::filesystem::exists(*snapshot)) {
    result.index = load_snapshot(*snapshot, config);
    result.snapshot_watermark = result.index->applied_seq();
  } else {
    result.index = create_index(config);
  }

  LogScan scan = read_change_log(changelog, config);
  result.poison = scan.poison;
  result.log_offset = scan.end_offset;
  std::uint64_t previous = 0;
  for (const auto& record : scan.records) {
    if (record.seq <= previous) {
      fail(ErrorCode::kCorruption, "change log seq " + std::to_string(record.seq) +
                                       " follows " + std::to_string(previous));
    }
    previous = record.seq;
    if (record.seq <= result.snapshot_watermark) continue;
    result.index->apply(record);
    ++result.applied;
  }
  return result;
}

Updator::Updator(Index& index, std::filesystem::path changelog, std::uint64_t start_offset,
                 std::chrono::milliseconds poll_interval)
    : index_(index), path_(std::move(changelog)), offset_(start_offset), poll_(poll_interval) {}

Updator::~Updator() { stop(); }

void Updator::start() {
  if (thread_.joinable()) return;
  thread_ = std::jthread([this](std::stop_token stop) { run(stop); });
}

void Updator::stop() {
  if (!thread_.joinable()) return;
  thread_.request_stop();
  thread_.join();
}

std::size_t Updator::poll_once() {
  std::lock_guard lock(mutex_);
  LogScan scan = read_change_log(path_, index_.config(), offset_);
  offset_ = scan.end_offset;
  if (scan.poison > 0) {
    poison_ += scan.poison;
    last_error_ = scan.last_error;
  }
  std::size_t applied = 0;
  for (const auto& record : scan.records) {
    if (record.seq <= index_.applied_seq()) continue;  // already applied
    try {
      index_.apply(record);
      ++applied;
    } catch (const Error& e) {
      ++poison_;
      last_error_ = "seq " + std::to_string(record.seq) + ": " + e.what();
      index_.set_applied_seq(record.seq);
    }
  }
  applied_ += applied;
  if (!scan.records.empty()) applied_cv_.notify_all();
  return applied;
}

std::string Updator::last_error() const {
  std::lock_guard lock(mutex_);
  return last_error_;
}

bool Updator::wait_for_seq(std::uint64_t seq, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return applied_cv_.wait_for(lock, timeout, [&] { return index_.applied_seq() >= seq; });
}

void Updator::run(std::stop_token stop) {
  std::mutex sleep_mutex;
  std::condition_variable_any sleeper;
  while (!stop.stop_requested()) {
    poll_once();
    std::unique_lock lock(sleep_mutex);
    sleeper.wait_for(lock, stop, poll_, [] { return false; });
  }
}

void run_updator(Index& index, const std::filesystem::path& changelog, std::uint64_t start_offset,
                 std::chrono::milliseconds poll_interval, std::stop_token stop) {
  Updator updator(index, changelog, start_offset, poll_interval);
  std::mutex sleep_mutex;
  std::condition_variable_any sleeper;
  while (!stop.stop_requested()) {
    updator.poll_once();
    std::unique_lock lock(sleep_mutex);
    sleeper.wait_for(lock, stop, poll_interval, [] { return false; });
  }
}

}  // namespace linr
