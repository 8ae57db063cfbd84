#pragma once

#include "blendplan/blend.hpp"
#include "blendplan/crawl.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace blendplan {

/// The preset catalog: the phase-1/phase-2 domain blends, the epoch-adjusted
/// long-horizon variant, the finegrained phase-2 blends, and the crawl
/// quality blends. Preset names are stable API; lookups are
/// case-insensitive.
struct Catalog {
  std::vector<BlendSpec> blends;
  std::vector<CrawlBlend> crawl_blends;

  const BlendSpec* find_blend(const std::string& name) const;
  const CrawlBlend* find_crawl_blend(const std::string& name) const;
};

const Catalog& builtin_catalog();

Catalog catalog_from_json_string(const std::string& text);
std::string catalog_to_json_string(const Catalog& catalog);
Catalog load_catalog(const std::filesystem::path& path);

/// The catalog named by the BLEND_CATALOG environment variable, or the
/// builtin one. Loaded fresh on each call.
Catalog active_catalog();

/// Domain-blend preset from the active catalog; throws UnknownPreset.
BlendSpec blend_preset(const std::string& name);

}  // namespace blendplan
