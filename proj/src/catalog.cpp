#include "blendplan/catalog.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace blendplan {

using detail::Json;

namespace {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct RawBlend {
  const char* name;
  std::vector<std::pair<const char*, const char*>> weights;  // key, percent
};

const std::vector<RawBlend>& raw_domain_blends() {
  static const std::vector<RawBlend> table{
      // Phase-1 blends
      {"P1-Blend1",
       {{"web_crawl", "65.0"}, {"math", "1.9"}, {"wiki", "0.1"},
        {"code", "15.0"}, {"books", "5.5"}, {"papers", "3.5"},
        {"cc_dv", "4.0"}, {"multilingual", "5.0"}}},
      {"P1-Blend2",
       {{"web_crawl", "65.0"}, {"math", "1.9"}, {"wiki", "0.1"},
        {"code", "8.0"}, {"books", "9.0"}, {"papers", "5.0"},
        {"cc_dv", "6.0"}, {"multilingual", "5.0"}}},
      {"P1-Blend3",
       {{"web_crawl", "58.0"}, {"math", "1.9"}, {"wiki", "0.1"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "5.0"},
        {"cc_dv", "6.0"}, {"multilingual", "5.0"}}},
      {"P1-Blend4",
       {{"web_crawl", "59.0"}, {"math", "2.9"}, {"wiki", "0.1"},
        {"code", "20.0"}, {"books", "5.5"}, {"papers", "3.5"},
        {"cc_dv", "4.0"}, {"multilingual", "5.0"}}},
      {"P1-Blend5",
       {{"web_crawl", "70.0"}, {"math", "1.9"}, {"wiki", "0.1"},
        {"code", "13.0"}, {"books", "4.5"}, {"papers", "1.9"},
        {"cc_dv", "3.6"}, {"multilingual", "5.0"}}},
      // Phase-2 blends
      {"P2-Blend1",
       {{"web_crawl", "31.0"}, {"math", "24.0"}, {"wiki", "1.0"},
        {"code", "20.0"}, {"books", "8.0"}, {"papers", "4.0"},
        {"cc_dv", "7.0"}, {"multilingual", "3.7"}, {"task_data", "1.3"}}},
      {"P2-Blend2",
       {{"web_crawl", "35.0"}, {"math", "24.0"}, {"wiki", "1.0"},
        {"code", "25.0"}, {"books", "4.0"}, {"papers", "2.0"},
        {"cc_dv", "4.0"}, {"multilingual", "3.7"}, {"task_data", "1.3"}}},
      {"P2-Blend3",
       {{"web_crawl", "31.0"}, {"math", "24.0"}, {"wiki", "1.0"},
        {"code", "29.0"}, {"books", "4.0"}, {"papers", "2.0"},
        {"cc_dv", "4.0"}, {"multilingual", "3.7"}, {"task_data", "1.3"}}},
      {"P2-Blend4",
       {{"web_crawl", "40.0"}, {"math", "24.0"}, {"wiki", "1.0"},
        {"code", "20.0"}, {"books", "4.0"}, {"papers", "2.0"},
        {"cc_dv", "4.0"}, {"multilingual", "3.7"}, {"task_data", "1.3"}}},
      {"P2-Blend5",
       {{"web_crawl", "35.0"}, {"math", "29.0"}, {"wiki", "1.0"},
        {"code", "20.0"}, {"books", "4.0"}, {"papers", "2.0"},
        {"cc_dv", "4.0"}, {"multilingual", "3.7"}, {"task_data", "1.3"}}},
      // Epoch-adjusted long-horizon variant of P2-Blend1
      {"P2-Blend6",
       {{"web_crawl", "49.0"}, {"math", "14.4"}, {"wiki", "0.6"},
        {"code", "12.0"}, {"books", "8.0"}, {"papers", "4.0"},
        {"cc_dv", "7.0"}, {"multilingual", "4.2"}, {"task_data", "0.8"}}},
      // Finegrained phase-2 blends
      {"CMC-B1",
       {{"web_crawl", "30.0"}, {"math", "23.0"}, {"wiki", "2.0"},
        {"code", "25.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}}},
      {"CMC-B2",
       {{"web_crawl", "15.0"}, {"math", "33.0"}, {"wiki", "2.0"},
        {"code", "30.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}}},
      {"CMC-B3",
       {{"web_crawl", "30.0"}, {"math", "33.0"}, {"wiki", "2.0"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}}},
      {"CMC-B3-F10ep",
       {{"web_crawl", "27.1"}, {"math", "33.0"}, {"wiki", "2.0"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}, {"flan", "2.9"},
        {"gsm8k", "0.0"}}},
      {"CMC-B3-F20ep",
       {{"web_crawl", "24.2"}, {"math", "33.0"}, {"wiki", "2.0"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}, {"flan", "5.8"},
        {"gsm8k", "0.0"}}},
      {"CMC-B3-GSM8K",
       {{"web_crawl", "30.0"}, {"math", "31.0"}, {"wiki", "2.0"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}, {"flan", "0.0"},
        {"gsm8k", "2.0"}}},
      {"Combo",
       {{"web_crawl", "28.3"}, {"math", "33.0"}, {"wiki", "2.0"},
        {"code", "15.0"}, {"books", "9.0"}, {"papers", "11.0"},
        {"cc_dv", "0.0"}, {"multilingual", "0.0"}, {"flan", "1.0"},
        {"gsm8k", "0.7"}}},
  };
  return table;
}

struct RawCrawlBlend {
  const char* name;
  const char* note;
  std::vector<std::pair<const char*, const char*>> weights;  // bucket(s), percent
  bool normalize;  // rescale so the weights sum to exactly 1
};

const std::vector<RawCrawlBlend>& raw_crawl_blends() {
  static const std::vector<RawCrawlBlend> table{
      {"CC-Blend1", "",
       {{"high", "57.0"}, {"medium_high", "25.0"}, {"medium", "18.0"},
        {"medium_low", "0.0"}, {"low", "0.0"}},
       false},
      {"CC-Blend2", "",
       {{"high", "57.0"}, {"medium_high", "25.0"}, {"medium", "13.0"},
        {"medium_low", "2.0"}, {"low", "3.0"}},
       false},
      {"CC-Blend3", "",
       {{"high", "51.5"}, {"medium_high", "23.5"},
        {"medium+medium_low", "23.0"}, {"low", "2.0"}},
       false},
      {"CC-Blend4", "",
       {{"high", "45.0"}, {"medium_high", "20.0"},
        {"medium+medium_low", "32.0"}, {"low", "3.0"}},
       false},
      {"CC-Token", "natural token distribution over the quality buckets",
       {{"high", "35.96"}, {"medium_high", "8.56"}, {"medium", "34.25"},
        {"medium_low", "15.41"}, {"low", "5.82"}},
       false},
      {"ND",
       "natural-distribution quality-estimation blend; source column sums to "
       "99.00, stored normalized",
       {{"high", "0.01"}, {"medium_high", "1.08"}, {"medium", "7.01"},
        {"medium_low", "26.46"}, {"low", "64.44"}},
       true},
      {"WS",
       "weighted-sampling quality-estimation blend; source column sums to "
       "73.38 (crawl share of the overall mix), stored normalized",
       {{"high", "0.04"}, {"medium_high", "6.42"}, {"medium", "41.83"},
        {"medium_low", "25.09"}, {"low", "0.00"}},
       true},
  };
  return table;
}

std::vector<QualityLabel> labels_from_key(const std::string& key) {
  std::vector<QualityLabel> labels;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '+')) labels.push_back(quality_from_name(part));
  if (labels.empty())
    fail(ErrorCode::ParseError, "empty crawl bucket key '" + key + "'");
  return labels;
}

std::string key_from_labels(const std::vector<QualityLabel>& labels) {
  std::string out;
  for (const QualityLabel l : labels) {
    if (!out.empty()) out += '+';
    out += quality_name(l);
  }
  return out;
}

CrawlBlend build_crawl_blend(const RawCrawlBlend& raw) {
  CrawlBlend blend;
  blend.name = raw.name;
  blend.note = raw.note;
  for (const auto& [key, percent] : raw.weights)
    blend.entries.push_back({labels_from_key(key), parse_weight(percent)});
  if (raw.normalize) {
    Rational sum = blend.weight_sum();
    for (auto& entry : blend.entries) entry.weight /= sum;
  }
  return blend;
}

Json crawl_blend_to_json(const CrawlBlend& blend) {
  Json j;
  j["name"] = blend.name;
  if (!blend.note.empty()) j["note"] = blend.note;
  Json w = Json::object();
  for (const auto& entry : blend.entries)
    w[key_from_labels(entry.labels)] = weight_to_string(entry.weight);
  j["weights"] = std::move(w);
  return j;
}

CrawlBlend crawl_blend_from_json(const Json& j) {
  CrawlBlend blend;
  blend.name = detail::require_string(j, "name", "crawl blend");
  if (j.contains("note")) blend.note = j.at("note").get<std::string>();
  const Json& weights = detail::require(j, "weights", "crawl blend " + blend.name);
  for (const auto& [key, value] : weights.items()) {
    if (!value.is_string())
      fail(ErrorCode::ParseError,
           "crawl blend " + blend.name + ": weight '" + key + "' must be a string");
    blend.entries.push_back(
        {labels_from_key(key), parse_weight(value.get<std::string>())});
  }
  return blend;
}

Json blend_entry_to_json(const BlendSpec& blend) {
  Json j;
  j["name"] = blend.name;
  Json w = Json::object();
  for (const auto& [key, weight] : blend.weights)
    w[key] = weight_to_string(weight);
  j["weights"] = std::move(w);
  if (blend.recommended_budget) j["recommended_budget"] = *blend.recommended_budget;
  return j;
}

}  // namespace

const BlendSpec* Catalog::find_blend(const std::string& name) const {
  std::string needle = lowercase(name);
  for (const auto& blend : blends)
    if (lowercase(blend.name) == needle) return &blend;
  return nullptr;
}

const CrawlBlend* Catalog::find_crawl_blend(const std::string& name) const {
  std::string needle = lowercase(name);
  for (const auto& blend : crawl_blends)
    if (lowercase(blend.name) == needle) return &blend;
  return nullptr;
}

const Catalog& builtin_catalog() {
  static const Catalog catalog = [] {
    Catalog c;
    for (const auto& raw : raw_domain_blends()) {
      BlendSpec blend;
      blend.name = raw.name;
      for (const auto& [key, percent] : raw.weights)
        blend.weights[key] = parse_weight(percent);
      c.blends.push_back(std::move(blend));
    }
    for (const auto& raw : raw_crawl_blends())
      c.crawl_blends.push_back(build_crawl_blend(raw));
    return c;
  }();
  return catalog;
}

Catalog catalog_from_json_string(const std::string& text) {
  Json j = detail::parse_json(text, "catalog");
  Catalog catalog;
  if (j.contains("blends"))
    for (const auto& bj : j.at("blends"))
      catalog.blends.push_back(blend_from_json_string(bj.dump()));
  if (j.contains("crawl_blends"))
    for (const auto& cj : j.at("crawl_blends"))
      catalog.crawl_blends.push_back(crawl_blend_from_json(cj));
  return catalog;
}

std::string catalog_to_json_string(const Catalog& catalog) {
  Json j;
  j["version"] = 1;
  Json blends = Json::array();
  for (const auto& blend : catalog.blends)
    blends.push_back(blend_entry_to_json(blend));
  j["blends"] = std::move(blends);
  Json crawls = Json::array();
  for (const auto& blend : catalog.crawl_blends)
    crawls.push_back(crawl_blend_to_json(blend));
  j["crawl_blends"] = std::move(crawls);
  return detail::dump_json(j);
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ParseError, "cannot open catalog file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return catalog_from_json_string(buf.str());
}

Catalog active_catalog() {
  if (const char* env = std::getenv("BLEND_CATALOG"); env && *env)
    return load_catalog(env);
  return builtin_catalog();
}

BlendSpec blend_preset(const std::string& name) {
  Catalog catalog = active_catalog();
  if (const BlendSpec* found = catalog.find_blend(name)) return *found;
  fail(ErrorCode::UnknownPreset, "no blend preset named '" + name + "'");
}

}  // namespace blendplan
