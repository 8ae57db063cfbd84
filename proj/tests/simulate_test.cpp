#include "blendplan/simulate.hpp"

#include "blendplan/catalog.hpp"
#include "blendplan/schedule.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace blendplan;
using blendplan::testing::reference_manifest;
using blendplan::testing::source;

namespace {

TrainingPlan reference_plan(std::int64_t total = 1'000'000'000'000) {
  return compose_plan(blend_preset("P1-Blend4"), blend_preset("P2-Blend1"),
                      total, Rational(3, 10));
}

const SourceExposure& exposure_of(const MilestoneReport& report,
                                  const std::string& id) {
  for (const auto& exp : report.sources)
    if (exp.source_id == id) return exp;
  throw std::out_of_range(id);
}

}  // namespace

TEST_CASE("exposure at an early milestone is weight times tokens") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  auto reports = exposure_report(plan, m, {200'000'000'000});
  REQUIRE(reports.size() == 2);  // requested milestone plus the appended final
  CHECK(reports[0].tokens == 200'000'000'000);
  CHECK(reports[1].tokens == plan.total_tokens);

  // crawl splits across the five buckets; their visit total is 59% of 200B
  std::int64_t crawl_tokens = 0;
  for (const auto& exp : reports[0].sources)
    if (exp.source_id.rfind("cc_", 0) == 0 && exp.source_id != "cc_dv")
      crawl_tokens += exp.tokens_seen;
  CHECK(crawl_tokens >= 118'000'000'000 - 5);  // five floors of slack
  CHECK(crawl_tokens <= 118'000'000'000);

  CHECK(exposure_of(reports[0], "math").tokens_seen ==
        floor_to_i64(Rational(29, 1000) * 200'000'000'000));
}

TEST_CASE("milestone zero reports nothing seen") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  auto reports = exposure_report(plan, m, {0, 500'000'000'000});
  for (const auto& exp : reports[0].sources) {
    CHECK(exp.tokens_seen == 0);
    CHECK(exp.epochs == 0);
  }
}

TEST_CASE("the final milestone agrees with plan_epochs") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  auto reports = exposure_report(plan, m, {});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].tokens == plan.total_tokens);
  auto epochs = plan_epochs(plan, m);
  for (const auto& exp : reports[0].sources)
    CHECK(exp.epochs == epochs.at(exp.source_id));
  CHECK(to_double(exposure_of(reports[0], "math").epochs) ==
        doctest::Approx(8.5728).epsilon(1e-4));
}

TEST_CASE("milestones must be increasing and within the horizon") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  CHECK_THROWS_AS(exposure_report(plan, m, {5, 5}), Error);
  CHECK_THROWS_AS(exposure_report(plan, m, {-1}), Error);
  CHECK_THROWS_AS(exposure_report(plan, m, {plan.total_tokens + 1}), Error);
}

TEST_CASE("token accounting at any milestone sums to the milestone") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  auto reports =
      exposure_report(plan, m, {250'000'000'000, 700'000'000'000, 900'000'000'000});
  for (const auto& report : reports) {
    std::int64_t sum = 0;
    for (const auto& exp : report.sources) sum += exp.tokens_seen;
    CHECK(sum <= report.tokens);
    CHECK(sum >= report.tokens - static_cast<std::int64_t>(report.sources.size()));
  }
}

TEST_CASE("analytic exposure matches an actual schedule within one quantum") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan(2048 * 4096);  // desk scale
  ScheduleConfig cfg;
  ScheduleStream stream(plan, m, cfg);

  const std::int64_t n = 1024;  // milestone at a quantum boundary
  auto counts = prefix_counts(stream, n);
  auto reports = exposure_report(plan, m, {n * cfg.quantum});
  for (const auto& exp : reports[0].sources) {
    std::int64_t empirical = counts[exp.source_id] * cfg.quantum;
    Rational exact = exp.epochs * m.available_tokens(exp.source_id);
    Rational drift = exact - empirical;
    if (drift < 0) drift = -drift;
    CHECK(drift < cfg.quantum);
  }
}

TEST_CASE("overexposure warnings trigger on per-phase epochs") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan(1'700'000'000'000);

  auto warnings = overexposure_check(plan, m, default_epoch_caps());
  bool math_warned = false, task_warned = false;
  for (const auto& w : warnings) {
    if (w.domain == "math") {
      math_warned = true;
      CHECK(to_double(w.total_epochs) == doctest::Approx(14.573).epsilon(1e-3));
      CHECK(to_double(w.phase2_epochs) == doctest::Approx(11.368).epsilon(1e-3));
      CHECK(w.cap == 8);
      CHECK(w.excess == w.phase2_epochs - 8);
    }
    if (w.domain == "task_data") task_warned = true;
  }
  CHECK(math_warned);
  CHECK(task_warned);
}

TEST_CASE("rescaling clears the math warning at the longer horizon") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  EpochCaps caps;
  caps.caps["math"] = 8;
  caps.caps["wiki"] = 5;
  caps.caps["code"] = 6;
  caps.caps["task_data"] = 8;
  TrainingPlan scaled = rescale_for_horizon(plan, m, 1'700'000'000'000, caps);

  auto warnings = overexposure_check(scaled, m, default_epoch_caps());
  for (const auto& w : warnings) CHECK(w.domain != "math");
  // task data stays slightly above eight epochs after the 0.1-percent
  // rounding (0.8% of 510B over 440M tokens)
  bool task_warned = false;
  for (const auto& w : warnings)
    if (w.domain == "task_data") task_warned = true;
  CHECK(task_warned);
}

TEST_CASE("no caps, no warnings") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan(1'700'000'000'000);
  CHECK(overexposure_check(plan, m, EpochCaps{}).empty());
}

TEST_CASE("horizon what-if scales epochs linearly and rescales blends") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  EpochCaps caps;
  caps.caps["math"] = 8;
  caps.caps["wiki"] = 5;
  caps.caps["code"] = 6;
  caps.caps["task_data"] = 8;

  auto rows = horizon_whatif(plan, m, {1'000'000'000'000, 1'700'000'000'000}, caps);
  REQUIRE(rows.size() == 2);
  CHECK(to_double(rows[0].domain_epochs.at("math")) ==
        doctest::Approx(8.5728).epsilon(1e-4));
  CHECK(to_double(rows[1].domain_epochs.at("math")) ==
        doctest::Approx(14.573).epsilon(1e-3));
  CHECK(rows[1].domain_epochs.at("math") ==
        rows[0].domain_epochs.at("math") * Rational(17, 10));
  CHECK(rows[0].warnings.size() <= rows[1].warnings.size());
  CHECK(rows[1].rescaled.phase2.blend.weights.at("math") == Rational(144, 1000));

  // the current horizon row matches the exposure report's final milestone
  auto final_report = exposure_report(plan, m, {});
  auto epochs = plan_epochs(plan, m);
  Rational math_from_report;
  for (const auto& exp : final_report[0].sources)
    if (exp.source_id == "math") math_from_report = exp.epochs;
  CHECK(rows[0].domain_epochs.at("math") == math_from_report);
  CHECK(epochs.at("math") == math_from_report);
}

TEST_CASE("epoch counts are invariant under joint horizon and factor scaling") {
  // raw counts divisible by 15 keep the downsampled budgets exact
  Manifest base({source("a", DomainCategory::HighQuality, "math",
                        QualityLabel::Unlabeled, 150'000'000),
                 source("b", DomainCategory::MediumQuality, "books",
                        QualityLabel::Unlabeled, 900'000'000),
                 source("c", DomainCategory::TaskData, "",
                        QualityLabel::Unlabeled, 45'000'000)},
                Rational(1, 15));
  BlendSpec p1, p2;
  p1.weights["a"] = Rational(1, 5);
  p1.weights["b"] = Rational(7, 10);
  p1.weights["c"] = Rational(1, 10);
  p2.weights["a"] = Rational(1, 2);
  p2.weights["b"] = Rational(3, 10);
  p2.weights["c"] = Rational(1, 5);
  const std::int64_t total = 10'000'000'000;
  TrainingPlan plan = compose_plan(p1, p2, total, Rational(3, 10));
  auto baseline = plan_epochs(plan, base);

  for (std::int64_t k : {2, 5, 15}) {
    Manifest scaled_manifest(base.sources(), Rational(k, 15));
    TrainingPlan scaled_plan = compose_plan(p1, p2, total * k, Rational(3, 10));
    auto scaled = plan_epochs(scaled_plan, scaled_manifest);
    CHECK(scaled == baseline);  // exact rational equality
  }

  // the full-data run at fifteen times the horizon sees the same epochs
  auto rendered = reports_to_text(exposure_report(plan, base, {}), {});
  CHECK(!rendered.empty());
}

TEST_CASE("full-data run at 15x the horizon matches the downsampled epochs") {
  // On the reference corpus the equality is within flooring noise only:
  // available budgets floor, e.g. 161.5e9/15.
  Manifest downsampled = reference_manifest();
  Manifest full(downsampled.sources(), 15 * downsampled.downsample_factor());
  TrainingPlan small = reference_plan(1'000'000'000'000);
  TrainingPlan big = reference_plan(15'000'000'000'000);
  auto small_epochs = plan_epochs(small, downsampled);
  auto big_epochs = plan_epochs(big, full);
  for (const auto& [id, e] : small_epochs) {
    double a = to_double(e), b = to_double(big_epochs.at(id));
    if (a == 0.0) {
      CHECK(b == 0.0);
    } else {
      CHECK(std::abs(a - b) / a < 1e-9);
    }
  }
}

TEST_CASE("report renderers emit all three formats") {
  Manifest m = reference_manifest();
  TrainingPlan plan = reference_plan();
  auto reports = exposure_report(plan, m, {500'000'000'000});
  auto warnings = overexposure_check(plan, m, default_epoch_caps());

  std::string json = reports_to_json_string(reports, warnings);
  CHECK(json.find("\"milestones\"") != std::string::npos);
  CHECK(json.find("\"epochs\"") != std::string::npos);

  std::string text = reports_to_text(reports, warnings);
  CHECK(text.find("milestone 500000000000 tokens") != std::string::npos);

  std::string csv = reports_to_csv(reports);
  CHECK(csv.substr(0, 36) == "milestone,source,tokens_seen,epochs\n");
}
