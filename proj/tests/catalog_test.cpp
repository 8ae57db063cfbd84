#include "blendplan/catalog.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace blendplan;

TEST_CASE("every catalog blend validates and sums to exactly one") {
  const Catalog& catalog = builtin_catalog();
  CHECK(catalog.blends.size() == 18);
  CHECK(catalog.crawl_blends.size() == 7);
  for (const auto& blend : catalog.blends) {
    INFO(blend.name);
    CHECK(validate_blend(blend).empty());
    CHECK(blend.weight_sum() == 1);
  }
  for (const auto& crawl : catalog.crawl_blends) {
    INFO(crawl.name);
    CHECK(crawl.weight_sum() == 1);
    Rational resolved = 0;
    for (const auto& [label, w] : crawl.bucket_weights()) resolved += w;
    CHECK(resolved == 1);
  }
}

TEST_CASE("spot values match the phase-2 reference blend") {
  const Catalog& catalog = builtin_catalog();
  const BlendSpec* p2 = catalog.find_blend("P2-Blend1");
  REQUIRE(p2 != nullptr);
  CHECK(p2->weights.at("math") == Rational(24, 100));
  CHECK(p2->weights.at("task_data") == Rational(13, 1000));
  CHECK(p2->weights.at("web_crawl") == Rational(31, 100));

  const BlendSpec* b6 = catalog.find_blend("P2-Blend6");
  REQUIRE(b6 != nullptr);
  CHECK(b6->weights.at("math") == Rational(144, 1000));
  CHECK(b6->weights.at("wiki") == Rational(6, 1000));
  CHECK(b6->weights.at("code") == Rational(12, 100));
  CHECK(b6->weights.at("task_data") == Rational(8, 1000));
  CHECK(b6->weights.at("web_crawl") == Rational(49, 100));
  CHECK(b6->weights.at("multilingual") == Rational(42, 1000));
}

TEST_CASE("lookups are case-insensitive and misses return null") {
  const Catalog& catalog = builtin_catalog();
  CHECK(catalog.find_blend("p2-blend1") != nullptr);
  CHECK(catalog.find_crawl_blend("cc-blend3") != nullptr);
  CHECK(catalog.find_blend("no-such") == nullptr);
  CHECK_THROWS_AS(blend_preset("no-such"), Error);
}

TEST_CASE("the shipped catalog file matches the builtin presets bit-exactly") {
  auto path =
      std::filesystem::path(BLENDPLAN_SOURCE_DIR) / "data" / "catalog.json";
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == catalog_to_json_string(builtin_catalog()));

  // and parsing the file reproduces the builtin weights exactly
  Catalog loaded = load_catalog(path);
  REQUIRE(loaded.blends.size() == builtin_catalog().blends.size());
  for (std::size_t i = 0; i < loaded.blends.size(); ++i)
    CHECK(loaded.blends[i].weights == builtin_catalog().blends[i].weights);
  CHECK(catalog_to_json_string(loaded) == catalog_to_json_string(builtin_catalog()));
}

TEST_CASE("BLEND_CATALOG overrides the active catalog") {
  auto path =
      std::filesystem::temp_directory_path() / "blendplan_custom_catalog.json";
  {
    std::ofstream out(path);
    out << R"({"version": 1,
               "blends": [{"name": "Tiny", "weights": {"a": "40.0", "b": "60.0"}}],
               "crawl_blends": []})";
  }
  setenv("BLEND_CATALOG", path.string().c_str(), 1);
  Catalog active = active_catalog();
  CHECK(active.blends.size() == 1);
  CHECK(blend_preset("Tiny").weights.at("b") == Rational(60, 100));
  CHECK_THROWS_AS(blend_preset("P1-Blend1"), Error);
  unsetenv("BLEND_CATALOG");
  CHECK(active_catalog().blends.size() == 18);
  std::filesystem::remove(path);
}
