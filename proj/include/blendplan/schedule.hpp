#pragma once

#include "blendplan/blend.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blendplan {

inline constexpr std::int64_t kDefaultQuantumTokens = 4096;

/// One sampling quantum. The id fields view storage owned by the stream that
/// produced the item; copy them out if they must outlive it. A quantum that
/// reaches the end of a source wraps to its beginning (the per-source epoch
/// counter advances), so `offset` is always the starting position.
struct ScheduleItem {
  std::int64_t index = 0;
  std::string_view source_id;
  std::string_view shard_id;
  std::int64_t offset = 0;
  std::int64_t quantum = 0;
};

enum class Ordering { TwoPhase, RandomOrder };

const char* ordering_name(Ordering ordering);
Ordering ordering_from_name(const std::string& name);

struct ScheduleConfig {
  std::uint64_t seed = 0;
  std::int64_t quantum = kDefaultQuantumTokens;
  Ordering ordering = Ordering::TwoPhase;
  int workers = 1;
};

struct CursorSourceState {
  std::string source_id;
  std::string shard_id;
  std::int64_t offset = 0;
  std::int64_t epoch = 0;
};

/// Fixed-size resume state: O(sources) regardless of how far the stream has
/// advanced.
struct ScheduleCursor {
  Ordering ordering = Ordering::TwoPhase;
  std::int64_t quantum = kDefaultQuantumTokens;
  int phase = 1;  // 1 or 2; 0 for random ordering
  std::int64_t step = 0;
  std::vector<std::pair<std::string, std::string>> credits;  // source, fraction
  std::vector<CursorSourceState> sources;
};

ScheduleCursor cursor_from_json_string(const std::string& text);
std::string cursor_to_json_string(const ScheduleCursor& cursor);

/// Single-consumer deterministic stream of sampling quanta. The emitted
/// sequence is a pure function of (plan, manifest, config); independent
/// instances may be consumed concurrently.
class ScheduleStream {
 public:
  ScheduleStream(const TrainingPlan& plan, const Manifest& manifest,
                 const ScheduleConfig& config);
  static ScheduleStream resume(const TrainingPlan& plan,
                               const Manifest& manifest,
                               const ScheduleConfig& config,
                               const ScheduleCursor& cursor);
  ScheduleStream(ScheduleStream&&) noexcept;
  ScheduleStream& operator=(ScheduleStream&&) noexcept;
  ~ScheduleStream();

  std::optional<ScheduleItem> next();
  std::int64_t total_items() const;
  std::int64_t items_emitted() const;
  ScheduleCursor cursor() const;

 private:
  struct Impl;
  explicit ScheduleStream(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Worker w's residue class: the items with index == w (mod workers).
class PartitionedStream {
 public:
  PartitionedStream(ScheduleStream stream, int worker, int workers);
  std::optional<ScheduleItem> next();

 private:
  ScheduleStream stream_;
  int worker_;
  int workers_;
};

PartitionedStream partition_for_worker(ScheduleStream stream, int worker,
                                       int workers);

std::map<std::string, std::int64_t> prefix_counts(ScheduleStream& stream,
                                                  std::int64_t n);
std::map<std::string, std::int64_t> prefix_counts(PartitionedStream& stream,
                                                  std::int64_t n);

/// Text export: `index<TAB>source_id<TAB>shard_id<TAB>offset<TAB>quantum`.
template <typename Stream>
void write_schedule_tsv(Stream& stream, std::ostream& out,
                        std::optional<std::int64_t> limit = std::nullopt);

/// Binary export: 16-byte header (magic "BLENDSCH", u32 version, u32
/// reserved), then little-endian u64 quadruples (source ordinal, shard
/// ordinal, offset, quantum). Ordinals index the manifest's source list and
/// the source's shard list; the item index is the record position.
template <typename Stream>
void write_schedule_binary(Stream& stream, const Manifest& manifest,
                           std::ostream& out,
                           std::optional<std::int64_t> limit = std::nullopt);

namespace detail_export {
void tsv_line(std::ostream& out, const ScheduleItem& item);
class BinaryScheduleWriter {
 public:
  BinaryScheduleWriter(const Manifest& manifest, std::ostream& out);
  void write(const ScheduleItem& item);

 private:
  std::ostream& out_;
  std::map<std::string, std::uint64_t, std::less<>> source_ordinal_;
  std::map<std::string, std::map<std::string, std::uint64_t, std::less<>>,
           std::less<>>
      shard_ordinal_;
};
}  // namespace detail_export

template <typename Stream>
void write_schedule_tsv(Stream& stream, std::ostream& out,
                        std::optional<std::int64_t> limit) {
  std::int64_t n = 0;
  while (!limit || n < *limit) {
    auto item = stream.next();
    if (!item) break;
    detail_export::tsv_line(out, *item);
    ++n;
  }
}

template <typename Stream>
void write_schedule_binary(Stream& stream, const Manifest& manifest,
                           std::ostream& out,
                           std::optional<std::int64_t> limit) {
  detail_export::BinaryScheduleWriter writer(manifest, out);
  std::int64_t n = 0;
  while (!limit || n < *limit) {
    auto item = stream.next();
    if (!item) break;
    writer.write(*item);
    ++n;
  }
}

}  // namespace blendplan
