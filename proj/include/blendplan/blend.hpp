#pragma once

#include "blendplan/manifest.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blendplan {

/// Normalized sampling weights keyed by source id or domain group key.
/// Group keys resolve against a manifest: category names ("web_crawl",
/// "high_quality", ...), crawl quality buckets ("cc_high", ...), or
/// subdomain names ("math", "books", ...). A group's weight divides among
/// its member sources by their natural (availability) distribution.
struct BlendSpec {
  std::string name;
  std::map<std::string, Rational> weights;
  std::optional<std::int64_t> recommended_budget;

  Rational weight_sum() const;
};

struct PhaseConfig {
  BlendSpec blend;
  std::int64_t token_budget = 0;
};

struct ManifestRef {
  std::string path;
  std::string fingerprint;

  bool empty() const { return path.empty() && fingerprint.empty(); }
};

struct TrainingPlan {
  PhaseConfig phase1;
  PhaseConfig phase2;
  std::int64_t total_tokens = 0;
  Rational p2_fraction;  // in [0, 1)
  ManifestRef manifest_ref;
};

struct EpochCaps {
  std::map<std::string, Rational> caps;  // domain key -> max epochs
};

/// One source's resolved sampling share within a blend.
struct ResolvedShare {
  const DataSource* source = nullptr;
  Rational weight;
};

struct BlendResolution {
  std::vector<ResolvedShare> shares;  // manifest order, zero weights included
};

/// Maps a blend key to manifest sources: exact source id first, then the
/// canonical group names. Empty result means the key is unknown.
std::vector<const DataSource*> resolve_key(const Manifest& m,
                                           const std::string& key);

/// Per-source weights for a blend; throws UnknownSource on unresolved keys
/// and ValidationError when two keys claim the same source.
BlendResolution resolve_blend(const BlendSpec& blend, const Manifest& m);

/// Weight of each source proportional to its available tokens.
BlendSpec natural_distribution(const Manifest& m);

/// Epochs per source for one blend over a token budget:
/// epochs_i = visits_i / available_i, where visits_i = weight_i * budget.
std::map<std::string, Rational> epochs_seen(const BlendSpec& blend,
                                            std::int64_t budget,
                                            const Manifest& m);

/// Sum of epochs_seen over both phases.
std::map<std::string, Rational> plan_epochs(const TrainingPlan& plan,
                                            const Manifest& m);

/// Epochs of a single domain key (group-level: group visits over group
/// availability) for one blend over a budget.
Rational key_epochs(const BlendSpec& blend, const std::string& key,
                    std::int64_t budget, const Manifest& m);

TrainingPlan compose_plan(BlendSpec p1, BlendSpec p2, std::int64_t total,
                          const Rational& p2_fraction);

/// Adjusts `domain` to see exactly `target_epochs` over `budget`. Other
/// weights rescale proportionally to keep the sum at 1; when the target is a
/// crawl quality bucket, only the other crawl buckets absorb the delta so
/// the overall crawl share stays fixed.
BlendSpec target_epochs_blend(const BlendSpec& base, const std::string& domain,
                              const Rational& target_epochs,
                              std::int64_t budget, const Manifest& m);

/// Rescales a plan to a new token horizon. Capped domains whose total plan
/// epochs at the new horizon would exceed their cap get their phase-2 weight
/// multiplied by s = old_total/new_total (s rounded to one decimal, the
/// rescaled weight rounded to 0.1 percent); the freed mass moves to web
/// crawl. Applies only when growing the horizon (s < 1).
TrainingPlan rescale_for_horizon(const TrainingPlan& plan, const Manifest& m,
                                 std::int64_t new_total, const EpochCaps& caps);

/// Structural checks: weights sum to 1 (tolerance 1e-9), no negatives.
std::vector<Diagnostic> validate_blend(const BlendSpec& blend);
/// Additionally checks that every key resolves and no source is claimed by
/// two keys.
std::vector<Diagnostic> validate_blend(const BlendSpec& blend,
                                       const Manifest& m);

BlendSpec blend_from_json_string(const std::string& text);
std::string blend_to_json_string(const BlendSpec& blend);
BlendSpec load_blend(const std::filesystem::path& path);
void save_blend(const BlendSpec& blend, const std::filesystem::path& path);

TrainingPlan plan_from_json_string(const std::string& text);
std::string plan_to_json_string(const TrainingPlan& plan);
TrainingPlan load_plan(const std::filesystem::path& path);
void save_plan(const TrainingPlan& plan, const std::filesystem::path& path);

EpochCaps caps_from_json_string(const std::string& text);
std::string caps_to_json_string(const EpochCaps& caps);
EpochCaps load_caps(const std::filesystem::path& path);

}  // namespace blendplan
