#include "blendplan/manifest.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace blendplan {

using detail::Json;

namespace {

const std::map<std::string, DomainCategory>& known_subdomains() {
  static const std::map<std::string, DomainCategory> table{
      {"math", DomainCategory::HighQuality},
      {"wiki", DomainCategory::HighQuality},
      {"code", DomainCategory::HighQuality},
      {"books", DomainCategory::MediumQuality},
      {"papers", DomainCategory::MediumQuality},
      {"cc_dv", DomainCategory::MediumQuality},
      {"flan", DomainCategory::TaskData},
      {"gsm8k", DomainCategory::TaskData},
  };
  return table;
}

}  // namespace

const char* quality_name(QualityLabel q) {
  switch (q) {
    case QualityLabel::High: return "high";
    case QualityLabel::MediumHigh: return "medium_high";
    case QualityLabel::Medium: return "medium";
    case QualityLabel::MediumLow: return "medium_low";
    case QualityLabel::Low: return "low";
    case QualityLabel::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

const char* category_name(DomainCategory c) {
  switch (c) {
    case DomainCategory::WebCrawl: return "web_crawl";
    case DomainCategory::HighQuality: return "high_quality";
    case DomainCategory::MediumQuality: return "medium_quality";
    case DomainCategory::Multilingual: return "multilingual";
    case DomainCategory::TaskData: return "task_data";
  }
  return "web_crawl";
}

QualityLabel quality_from_name(const std::string& name) {
  for (QualityLabel q :
       {QualityLabel::High, QualityLabel::MediumHigh, QualityLabel::Medium,
        QualityLabel::MediumLow, QualityLabel::Low, QualityLabel::Unlabeled})
    if (name == quality_name(q)) return q;
  fail(ErrorCode::ParseError, "unknown quality label '" + name + "'");
}

DomainCategory category_from_name(const std::string& name) {
  for (DomainCategory c :
       {DomainCategory::WebCrawl, DomainCategory::HighQuality,
        DomainCategory::MediumQuality, DomainCategory::Multilingual,
        DomainCategory::TaskData})
    if (name == category_name(c)) return c;
  fail(ErrorCode::ParseError, "unknown category '" + name + "'");
}

Manifest::Manifest(std::vector<DataSource> sources, Rational factor)
    : sources_(std::move(sources)), factor_(std::move(factor)) {
  available_.reserve(sources_.size());
  for (const auto& s : sources_)
    available_.push_back(floor_to_i64(factor_ * s.raw_tokens));
}

const DataSource* Manifest::find(const std::string& id) const {
  for (const auto& s : sources_)
    if (s.id == id) return &s;
  return nullptr;
}

const DataSource& Manifest::at(const std::string& id) const {
  if (const DataSource* s = find(id)) return *s;
  fail(ErrorCode::UnknownSource, "no source with id '" + id + "'");
}

std::int64_t Manifest::available_tokens(const DataSource& source) const {
  auto idx = static_cast<std::size_t>(&source - sources_.data());
  if (idx < sources_.size()) return available_[idx];
  return floor_to_i64(factor_ * source.raw_tokens);
}

std::int64_t Manifest::available_tokens(const std::string& id) const {
  return available_tokens(at(id));
}

std::int64_t Manifest::total_available() const {
  std::int64_t total = 0;
  for (std::int64_t a : available_) total += a;
  return total;
}

std::vector<ShardSlice> Manifest::available_shards(
    const DataSource& source) const {
  std::int64_t budget = available_tokens(source);
  std::vector<ShardSlice> out;
  if (budget <= 0) return out;
  if (source.shards.empty()) {
    out.push_back({"0", budget});
    return out;
  }
  for (const auto& shard : source.shards) {
    if (budget <= 0) break;
    std::int64_t take = std::min(shard.tokens, budget);
    out.push_back({shard.id, take});
    budget -= take;
  }
  return out;
}

std::vector<Diagnostic> Manifest::validate() const {
  std::vector<Diagnostic> diags;
  if (factor_ <= 0 || factor_ > 1)
    diags.push_back({"BadFactor", "",
                     "downsample_factor must lie in (0, 1], got " +
                         to_fraction_string(factor_)});
  std::set<std::string> seen;
  for (const auto& s : sources_) {
    if (s.id.empty())
      diags.push_back({"EmptyId", s.id, "source id must be nonempty"});
    if (!seen.insert(s.id).second)
      diags.push_back({"DuplicateSourceId", s.id, "duplicate source id"});
    if (s.raw_tokens <= 0)
      diags.push_back({"NonPositiveTokens", s.id,
                       "raw_tokens must be positive, got " +
                           std::to_string(s.raw_tokens)});
    if (s.category == DomainCategory::WebCrawl &&
        s.quality == QualityLabel::Unlabeled)
      diags.push_back({"UnlabeledCrawl", s.id,
                       "web crawl sources must carry a quality label"});
    auto known = known_subdomains().find(s.subdomain);
    if (known != known_subdomains().end() && known->second != s.category)
      diags.push_back(
          {"CategoryMismatch", s.id,
           "subdomain '" + s.subdomain + "' belongs to category '" +
               category_name(known->second) + "', not '" +
               category_name(s.category) + "'"});
    if (!s.shards.empty()) {
      std::int64_t sum = 0;
      std::set<std::string> shard_ids;
      for (const auto& shard : s.shards) {
        sum += shard.tokens;
        if (shard.tokens <= 0)
          diags.push_back({"NonPositiveShard", s.id,
                           "shard '" + shard.id + "' has non-positive length"});
        if (!shard_ids.insert(shard.id).second)
          diags.push_back(
              {"DuplicateShardId", s.id, "duplicate shard id '" + shard.id + "'"});
      }
      if (sum != s.raw_tokens)
        diags.push_back({"ShardSumMismatch", s.id,
                         "shards sum to " + std::to_string(sum) +
                             " but raw_tokens is " +
                             std::to_string(s.raw_tokens)});
    }
  }
  return diags;
}

namespace {

DataSource source_from_json(const Json& j) {
  DataSource s;
  s.id = detail::require_string(j, "id", "source");
  s.category =
      category_from_name(detail::require_string(j, "category", "source " + s.id));
  if (j.contains("subdomain")) s.subdomain = j.at("subdomain").get<std::string>();
  if (j.contains("quality"))
    s.quality = quality_from_name(j.at("quality").get<std::string>());
  s.raw_tokens = detail::require_int(j, "raw_tokens", "source " + s.id);
  if (j.contains("shards")) {
    const Json& shards = j.at("shards");
    if (!shards.is_array())
      fail(ErrorCode::ParseError, "source " + s.id + ": shards must be an array");
    for (const auto& sj : shards) {
      Shard shard;
      shard.id = detail::require_string(sj, "id", "shard of " + s.id);
      shard.tokens = detail::require_int(sj, "tokens", "shard of " + s.id);
      s.shards.push_back(std::move(shard));
    }
  }
  return s;
}

Json source_to_json(const DataSource& s) {
  Json j;
  j["id"] = s.id;
  j["category"] = category_name(s.category);
  if (!s.subdomain.empty()) j["subdomain"] = s.subdomain;
  j["quality"] = quality_name(s.quality);
  j["raw_tokens"] = s.raw_tokens;
  if (!s.shards.empty()) {
    Json arr = Json::array();
    for (const auto& shard : s.shards)
      arr.push_back(Json{{"id", shard.id}, {"tokens", shard.tokens}});
    j["shards"] = std::move(arr);
  }
  return j;
}

Manifest manifest_from_json(const Json& j) {
  Rational factor = 1;
  if (j.contains("downsample_factor")) {
    const Json& f = j.at("downsample_factor");
    if (!f.is_string())
      fail(ErrorCode::ParseError,
           "manifest: downsample_factor must be a \"p/q\" string");
    factor = parse_rational(f.get<std::string>());
  }
  const Json& sources = detail::require(j, "sources", "manifest");
  if (!sources.is_array())
    fail(ErrorCode::ParseError, "manifest: sources must be an array");
  std::vector<DataSource> out;
  out.reserve(sources.size());
  for (const auto& sj : sources) out.push_back(source_from_json(sj));
  return Manifest(std::move(out), std::move(factor));
}

Json manifest_to_json(const Manifest& m) {
  Json j;
  j["downsample_factor"] = to_fraction_string(m.downsample_factor());
  Json arr = Json::array();
  for (const auto& s : m.sources()) arr.push_back(source_to_json(s));
  j["sources"] = std::move(arr);
  return j;
}

}  // namespace

Manifest manifest_from_json_string(const std::string& text) {
  return manifest_from_json(detail::parse_json(text, "manifest"));
}

std::string manifest_to_json_string(const Manifest& m) {
  return detail::dump_json(manifest_to_json(m));
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ParseError, "cannot open manifest file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Manifest m = manifest_from_json_string(buf.str());
  throw_if_diagnostics(m.validate(), "invalid manifest " + path.string());
  return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::ParseError, "cannot write manifest file " + path.string());
  out << manifest_to_json_string(m);
}

Manifest downsample(const Manifest& m, const Rational& factor) {
  if (factor <= 0 || factor > 1)
    fail(ErrorCode::DomainError,
         "downsample factor must lie in (0, 1], got " +
             to_fraction_string(factor));
  return Manifest(m.sources(), m.downsample_factor() * factor);
}

std::string manifest_fingerprint(const Manifest& m) {
  std::string text = manifest_to_json_string(m);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace blendplan
