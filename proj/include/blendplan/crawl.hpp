#pragma once

#include "blendplan/blend.hpp"

#include <map>
#include <string>
#include <vector>

namespace blendplan {

/// One row of a crawl blend: a quality bucket (or a merged pool of buckets
/// sharing a joint weight) and its sampling weight.
struct CrawlBlendEntry {
  std::vector<QualityLabel> labels;
  Rational weight;
};

/// Sampling weights over the five crawl quality buckets. Weights sum to 1;
/// merged pools split their joint weight between members by the natural
/// bucket token distribution.
struct CrawlBlend {
  std::string name;
  std::string note;
  std::vector<CrawlBlendEntry> entries;

  Rational weight_sum() const;

  /// Per-label weights with merged pools resolved.
  std::map<QualityLabel, Rational> bucket_weights() const;
};

/// Natural share of crawl tokens per quality bucket.
const std::map<QualityLabel, Rational>& crawl_bucket_natural_shares();

/// Canonical blend key for a bucket: "cc_high", "cc_medium_high", ...
std::string crawl_bucket_key(QualityLabel label);

/// Named preset from the active catalog (CC-Blend1..4, ND, WS, CC-Token).
CrawlBlend cc_blend_preset(const std::string& name);

/// Replaces the aggregate web-crawl weight with per-bucket weights
/// w * bucket_weight, dropping zero buckets. A zero crawl weight leaves the
/// blend unchanged.
BlendSpec expand_crawl(const BlendSpec& blend, const CrawlBlend& crawl);

/// Quality-probe blend: 66% of the tested source mixed with 34% of
/// high-quality crawl, intended for a 50B-token continuation.
BlendSpec probe_blend(const std::string& tested, const Manifest& m);

}  // namespace blendplan
