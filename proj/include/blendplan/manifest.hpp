#pragma once

#include "blendplan/errors.hpp"
#include "blendplan/rational.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace blendplan {

enum class QualityLabel { High, MediumHigh, Medium, MediumLow, Low, Unlabeled };
enum class DomainCategory {
  WebCrawl,
  HighQuality,
  MediumQuality,
  Multilingual,
  TaskData,
};

const char* quality_name(QualityLabel q);
const char* category_name(DomainCategory c);
QualityLabel quality_from_name(const std::string& name);
DomainCategory category_from_name(const std::string& name);

struct Shard {
  std::string id;
  std::int64_t tokens = 0;

  bool operator==(const Shard&) const = default;
};

struct DataSource {
  std::string id;
  DomainCategory category = DomainCategory::WebCrawl;
  std::string subdomain;  // optional grouping key, e.g. "math", "books"
  QualityLabel quality = QualityLabel::Unlabeled;
  std::int64_t raw_tokens = 0;
  std::vector<Shard> shards;  // empty means one implicit shard of raw_tokens

  bool operator==(const DataSource&) const = default;
};

/// Truncated view of a shard after downsampling.
struct ShardSlice {
  std::string id;
  std::int64_t tokens = 0;
};

/// Immutable collection of data sources plus the cumulative downsampling
/// factor. Token availability is floor(factor * raw_tokens) per source; the
/// shard list is prefix-truncated to that budget. Safe to share across
/// threads once constructed.
class Manifest {
 public:
  Manifest() = default;
  Manifest(std::vector<DataSource> sources, Rational factor);

  const std::vector<DataSource>& sources() const { return sources_; }
  const Rational& downsample_factor() const { return factor_; }

  const DataSource* find(const std::string& id) const;
  const DataSource& at(const std::string& id) const;

  std::int64_t available_tokens(const DataSource& source) const;
  std::int64_t available_tokens(const std::string& id) const;
  std::int64_t total_available() const;

  /// Prefix of the shard list covering exactly available_tokens(source).
  std::vector<ShardSlice> available_shards(const DataSource& source) const;

  std::vector<Diagnostic> validate() const;

 private:
  std::vector<DataSource> sources_;
  Rational factor_ = 1;
  std::vector<std::int64_t> available_;  // parallel to sources_
};

Manifest manifest_from_json_string(const std::string& text);
std::string manifest_to_json_string(const Manifest& m);

/// Loads, parses and validates; throws ParseError / ValidationError.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Applies a further downsampling factor in (0, 1]. Raw token counts are
/// preserved; only availability shrinks.
Manifest downsample(const Manifest& m, const Rational& factor);

/// FNV-1a over the canonical JSON serialization, as "0x" hex. Used to pin a
/// plan to the manifest it was composed against.
std::string manifest_fingerprint(const Manifest& m);

}  // namespace blendplan
