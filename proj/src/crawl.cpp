#include "blendplan/crawl.hpp"

#include "blendplan/catalog.hpp"

#include <algorithm>

namespace blendplan {

namespace {

std::string canonical(const std::string& s) {
  std::string out;
  for (char c : s)
    out.push_back(c == '-' || c == ' '
                      ? '_'
                      : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

Rational CrawlBlend::weight_sum() const {
  Rational sum = 0;
  for (const auto& e : entries) sum += e.weight;
  return sum;
}

std::map<QualityLabel, Rational> CrawlBlend::bucket_weights() const {
  const auto& natural = crawl_bucket_natural_shares();
  std::map<QualityLabel, Rational> out;
  for (const auto& entry : entries) {
    if (entry.labels.size() == 1) {
      out[entry.labels.front()] += entry.weight;
      continue;
    }
    Rational pool = 0;
    for (QualityLabel l : entry.labels) pool += natural.at(l);
    for (QualityLabel l : entry.labels)
      out[l] += entry.weight * natural.at(l) / pool;
  }
  return out;
}

const std::map<QualityLabel, Rational>& crawl_bucket_natural_shares() {
  // Natural token distribution over the five quality buckets.
  static const std::map<QualityLabel, Rational> shares{
      {QualityLabel::High, Rational(3596, 10000)},
      {QualityLabel::MediumHigh, Rational(856, 10000)},
      {QualityLabel::Medium, Rational(3425, 10000)},
      {QualityLabel::MediumLow, Rational(1541, 10000)},
      {QualityLabel::Low, Rational(582, 10000)},
  };
  return shares;
}

std::string crawl_bucket_key(QualityLabel label) {
  return std::string("cc_") + quality_name(label);
}

CrawlBlend cc_blend_preset(const std::string& name) {
  Catalog catalog = active_catalog();
  if (const CrawlBlend* found = catalog.find_crawl_blend(name)) return *found;
  fail(ErrorCode::UnknownPreset, "no crawl blend preset named '" + name + "'");
}

BlendSpec expand_crawl(const BlendSpec& blend, const CrawlBlend& crawl) {
  auto it = std::find_if(blend.weights.begin(), blend.weights.end(),
                         [](const auto& kv) {
                           return canonical(kv.first) == "web_crawl";
                         });
  if (it == blend.weights.end())
    fail(ErrorCode::MissingCrawlKey,
         "blend '" + blend.name + "' has no aggregate web crawl weight");
  Rational w = it->second;
  if (w == 0) return blend;
  if (crawl.weight_sum() != 1)
    fail(ErrorCode::DomainError,
         "crawl blend '" + crawl.name + "' must sum to 1 to expand, sums to " +
             weight_to_string(crawl.weight_sum()));

  BlendSpec out = blend;
  out.weights.erase(it->first);
  for (const auto& [label, bucket_weight] : crawl.bucket_weights()) {
    if (bucket_weight == 0) continue;
    out.weights[crawl_bucket_key(label)] += w * bucket_weight;
  }
  return out;
}

BlendSpec probe_blend(const std::string& tested, const Manifest& m) {
  if (resolve_key(m, tested).empty())
    fail(ErrorCode::UnknownSource,
         "probe target '" + tested + "' matches no source or group");
  auto high = resolve_key(m, crawl_bucket_key(QualityLabel::High));
  if (high.empty())
    fail(ErrorCode::UnknownSource,
         "manifest has no high-quality crawl source for the probe mix");
  std::int64_t high_avail = 0;
  for (const DataSource* s : high) high_avail += m.available_tokens(*s);
  if (high_avail <= 0)
    fail(ErrorCode::DomainError, "high-quality crawl has no available tokens");

  BlendSpec out;
  out.name = "probe-" + tested;
  out.recommended_budget = 50'000'000'000;
  out.weights[tested] += Rational(66, 100);
  for (const DataSource* s : high)
    out.weights[s->id] +=
        Rational(34, 100) * Rational(m.available_tokens(*s), high_avail);
  return out;
}

}  // namespace blendplan
