#include "blendplan/cli.hpp"

#include "blendplan/catalog.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

using namespace blendplan;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"blendplan"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "blendplan_cli_test";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

fs::path repo_manifest() {
  return fs::path(BLENDPLAN_SOURCE_DIR) / "data" / "example_manifest.json";
}

}  // namespace

TEST_CASE("plan composes and reruns byte-identically") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  auto args = std::vector<std::string>{
      "plan",          "--manifest",      repo_manifest().string(),
      "--p1",          "P1-Blend4",       "--p2",
      "P2-Blend1",     "--total",         "1e12",
      "--p2-fraction", "0.4",             "-o",
      plan_path.string()};
  RunResult first = run_cli(args);
  CHECK(first.code == 0);
  CHECK(first.err.empty());
  std::string once = slurp(plan_path);
  CHECK(once.find("\"token_budget\": 600000000000") != std::string::npos);
  CHECK(once.find("\"token_budget\": 400000000000") != std::string::npos);

  RunResult second = run_cli(args);
  CHECK(second.code == 0);
  CHECK(slurp(plan_path) == once);
}

TEST_CASE("validate flags bad blends with a diagnostic line and exit 1") {
  TempDir tmp;
  auto blend_path = tmp / "bad.json";
  {
    std::ofstream out(blend_path);
    out << R"({"name": "bad", "weights": {"a": "50.0", "b": "49.0"}})";
  }
  RunResult r = run_cli({"validate", "--blend", blend_path.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("\"SumMismatch\"") != std::string::npos);

  auto good_path = tmp / "good.json";
  {
    std::ofstream out(good_path);
    out << R"({"name": "good", "weights": {"math": "40.0", "books": "60.0"}})";
  }
  RunResult ok = run_cli({"validate", "--blend", good_path.string(),
                          "--manifest", repo_manifest().string()});
  CHECK(ok.code == 0);
  CHECK(ok.err.empty());
}

TEST_CASE("worker partitions from the command line reunite into the stream") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  REQUIRE(run_cli({"plan", "--manifest", repo_manifest().string(), "--p1",
                   "P1-Blend4", "--p2", "P2-Blend1", "--total",
                   std::to_string(1000 * 4096), "--p2-fraction", "0.4", "-o",
                   plan_path.string()})
              .code == 0);

  auto full = tmp / "full.tsv";
  REQUIRE(run_cli({"schedule", "--plan", plan_path.string(), "--seed", "7",
                   "-o", full.string()})
              .code == 0);

  auto part0 = tmp / "p0.tsv";
  auto part1 = tmp / "p1.tsv";
  REQUIRE(run_cli({"schedule", "--plan", plan_path.string(), "--seed", "7",
                   "--workers", "2", "--worker", "0", "-o", part0.string()})
              .code == 0);
  REQUIRE(run_cli({"schedule", "--plan", plan_path.string(), "--seed", "7",
                   "--workers", "2", "--worker", "1", "-o", part1.string()})
              .code == 0);

  // interleave the two partitions by index and compare with the full stream
  std::istringstream a(slurp(part0)), b(slurp(part1));
  std::string merged, la, lb;
  bool have_a = static_cast<bool>(std::getline(a, la));
  bool have_b = static_cast<bool>(std::getline(b, lb));
  while (have_a || have_b) {
    auto index_of = [](const std::string& line) {
      return std::stoll(line.substr(0, line.find('\t')));
    };
    bool take_a = have_a && (!have_b || index_of(la) < index_of(lb));
    if (take_a) {
      merged += la + "\n";
      have_a = static_cast<bool>(std::getline(a, la));
    } else {
      merged += lb + "\n";
      have_b = static_cast<bool>(std::getline(b, lb));
    }
  }
  CHECK(merged == slurp(full));
}

TEST_CASE("schedule runs are byte-identical for equal inputs") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  REQUIRE(run_cli({"plan", "--manifest", repo_manifest().string(), "--p1",
                   "P1-Blend1", "--p2", "P2-Blend2", "--total",
                   std::to_string(500 * 4096), "--p2-fraction", "0.3", "-o",
                   plan_path.string()})
              .code == 0);
  auto out1 = tmp / "a.tsv";
  auto out2 = tmp / "b.tsv";
  for (const char* ordering : {"two-phase", "random"}) {
    REQUIRE(run_cli({"schedule", "--plan", plan_path.string(), "--ordering",
                     ordering, "--seed", "42", "-o", out1.string()})
                .code == 0);
    REQUIRE(run_cli({"schedule", "--plan", plan_path.string(), "--ordering",
                     ordering, "--seed", "42", "-o", out2.string()})
                .code == 0);
    CHECK(slurp(out1) == slurp(out2));
  }
}

TEST_CASE("simulate and scale work end to end") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  REQUIRE(run_cli({"plan", "--manifest", repo_manifest().string(), "--p1",
                   "P1-Blend4", "--p2", "P2-Blend1", "--total", "1T",
                   "--p2-fraction", "0.3", "-o", plan_path.string()})
              .code == 0);

  RunResult sim = run_cli({"simulate", "--plan", plan_path.string(),
                           "--milestones", "200B,629B", "--format", "csv"});
  CHECK(sim.code == 0);
  CHECK(sim.out.find("milestone,source,tokens_seen,epochs") == 0);
  CHECK(sim.out.find("629000000000,math,") != std::string::npos);

  auto caps_path = tmp / "caps.json";
  {
    std::ofstream out(caps_path);
    out << R"({"caps": {"math": "8", "wiki": "5", "code": "6", "task_data": "8"}})";
  }
  auto scaled_path = tmp / "scaled.json";
  RunResult scale = run_cli({"scale", "--plan", plan_path.string(), "--total",
                             "1.7T", "--caps", caps_path.string(), "-o",
                             scaled_path.string()});
  CHECK(scale.code == 0);
  std::string scaled = slurp(scaled_path);
  CHECK(scaled.find("\"math\": \"14.4\"") != std::string::npos);
  CHECK(scaled.find("\"web_crawl\": \"49.5\"") != std::string::npos);
  CHECK(scaled.find("\"task_data\": \"0.8\"") != std::string::npos);
}

TEST_CASE("lr emits csv over the plan horizon") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  REQUIRE(run_cli({"plan", "--manifest", repo_manifest().string(), "--p1",
                   "P1-Blend4", "--p2", "P2-Blend1", "--total", "1T",
                   "--p2-fraction", "0.4", "-o", plan_path.string()})
              .code == 0);
  RunResult lr = run_cli({"lr", "--plan", plan_path.string(), "--stride", "500B"});
  CHECK(lr.code == 0);
  CHECK(lr.out.substr(0, 10) == "tokens,lr\n");
  CHECK(lr.out.find("0,0.0003\n") != std::string::npos);
  CHECK(lr.out.find("1000000000000,3e-06\n") != std::string::npos);

  RunResult direct = run_cli({"lr", "--total", "1e12", "--p1-tokens", "600B",
                              "--decay", "linear", "--stride", "1T"});
  CHECK(direct.code == 0);
  CHECK(direct.out.find("1000000000000,3e-06\n") != std::string::npos);
}

TEST_CASE("presets lists every catalog entry as valid") {
  RunResult r = run_cli({"presets"});
  CHECK(r.code == 0);
  const Catalog& catalog = builtin_catalog();
  for (const auto& blend : catalog.blends) {
    CHECK(r.out.find(blend.name + "\tdomain\tok") != std::string::npos);
  }
  for (const auto& crawl : catalog.crawl_blends) {
    CHECK(r.out.find(crawl.name + "\tcrawl\tok") != std::string::npos);
  }

  RunResult js = run_cli({"presets", "--format", "json"});
  CHECK(js.code == 0);
  CHECK(js.out == catalog_to_json_string(catalog));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"plan"}).code == 2);                       // missing required
  CHECK(run_cli({"no-such-verb"}).code == 2);
  CHECK(run_cli({"schedule", "--plan", "x", "--format", "yaml"}).code == 2);
  RunResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("plan") != std::string::npos);
}

TEST_CASE("missing files surface as diagnostics with exit 1") {
  RunResult r = run_cli({"schedule", "--plan", "/nonexistent/plan.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("ParseError") != std::string::npos);
}

TEST_CASE("BLEND_CATALOG env var substitutes the preset catalog") {
  TempDir tmp;
  auto catalog_path = tmp / "catalog.json";
  {
    std::ofstream out(catalog_path);
    out << R"({"version": 1,
               "blends": [{"name": "Mini", "weights": {"books": "100.0"}}],
               "crawl_blends": []})";
  }
  setenv("BLEND_CATALOG", catalog_path.string().c_str(), 1);
  RunResult r = run_cli({"presets"});
  unsetenv("BLEND_CATALOG");
  CHECK(r.code == 0);
  CHECK(r.out == "Mini\tdomain\tok\n");
}

TEST_CASE("fingerprint mismatches warn but do not fail") {
  TempDir tmp;
  auto plan_path = tmp / "plan.json";
  REQUIRE(run_cli({"plan", "--manifest", repo_manifest().string(), "--p1",
                   "P1-Blend4", "--p2", "P2-Blend1", "--total",
                   std::to_string(100 * 4096), "--p2-fraction", "0.3", "-o",
                   plan_path.string()})
              .code == 0);
  // point the schedule at a different manifest than the plan was built on
  auto other_manifest = tmp / "other.json";
  {
    std::string text = slurp(repo_manifest());
    auto pos = text.find("161500000000");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "161500000015");
    std::ofstream out(other_manifest);
    out << text;
  }
  RunResult r = run_cli({"schedule", "--plan", plan_path.string(), "--manifest",
                         other_manifest.string(), "--limit", "1"});
  CHECK(r.code == 0);
  CHECK(r.err.find("ManifestFingerprintMismatch") != std::string::npos);
}
