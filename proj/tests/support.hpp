#pragma once

// Shared fixtures for the test suites.

#include "blendplan/blend.hpp"
#include "blendplan/manifest.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace blendplan::testing {

inline DataSource source(std::string id, DomainCategory category,
                         std::string subdomain, QualityLabel quality,
                         std::int64_t raw_tokens,
                         std::vector<Shard> shards = {}) {
  DataSource s;
  s.id = std::move(id);
  s.category = category;
  s.subdomain = std::move(subdomain);
  s.quality = quality;
  s.raw_tokens = raw_tokens;
  s.shards = std::move(shards);
  return s;
}

/// The reference manifest: the production corpus domain sizes with web crawl
/// broken down into the five quality buckets by their natural shares.
inline Manifest reference_manifest(const Rational& factor = Rational(1, 15)) {
  std::vector<DataSource> sources;
  auto crawl = [&](std::string id, QualityLabel q, std::int64_t tokens) {
    sources.push_back(source(std::move(id), DomainCategory::WebCrawl, "cc", q,
                             tokens));
  };
  crawl("cc_high", QualityLabel::High, 2245450280000);
  crawl("cc_medium_high", QualityLabel::MediumHigh, 534512080000);
  crawl("cc_medium", QualityLabel::Medium, 2138672750000);
  crawl("cc_medium_low", QualityLabel::MediumLow, 962246630000);
  crawl("cc_low", QualityLabel::Low, 363418260000);
  sources.push_back(source("math", DomainCategory::HighQuality, "math",
                           QualityLabel::Unlabeled, 161500000000));
  sources.push_back(source("wiki", DomainCategory::HighQuality, "wiki",
                           QualityLabel::Unlabeled, 16700000000));
  sources.push_back(source("code", DomainCategory::HighQuality, "code",
                           QualityLabel::Unlabeled, 760300000000));
  sources.push_back(source("books", DomainCategory::MediumQuality, "books",
                           QualityLabel::Unlabeled, 776300000000));
  sources.push_back(source("papers", DomainCategory::MediumQuality, "papers",
                           QualityLabel::Unlabeled, 212600000000));
  sources.push_back(source("cc_dv", DomainCategory::MediumQuality, "cc_dv",
                           QualityLabel::Unlabeled, 348300000000));
  sources.push_back(source("multilingual", DomainCategory::Multilingual, "",
                           QualityLabel::Unlabeled, 1457200000000));
  sources.push_back(source("task_data", DomainCategory::TaskData, "",
                           QualityLabel::Unlabeled, 6600000000));
  return Manifest(std::move(sources), factor);
}

/// Synthetic manifest of `k` generic sources named src00..; each source one
/// implicit shard large enough that scheduling never wraps.
inline Manifest synthetic_manifest(int k, std::int64_t tokens_each = 1) {
  std::vector<DataSource> sources;
  for (int i = 0; i < k; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "src%02d", i);
    sources.push_back(source(name, DomainCategory::MediumQuality, "",
                             QualityLabel::Unlabeled, tokens_each));
  }
  return Manifest(std::move(sources), 1);
}

/// Random exact weights over the synthetic source ids summing to 1.
inline BlendSpec random_blend(std::mt19937_64& rng, int k,
                              std::int64_t max_part = 1000000) {
  std::vector<std::int64_t> parts(static_cast<std::size_t>(k));
  std::int64_t total = 0;
  for (auto& p : parts) {
    p = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_part));
    total += p;
  }
  BlendSpec blend;
  blend.name = "random";
  for (int i = 0; i < k; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "src%02d", i);
    blend.weights[name] = Rational(parts[static_cast<std::size_t>(i)], total);
  }
  return blend;
}

}  // namespace blendplan::testing
