#include "blendplan/simulate.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace blendplan {

using detail::Json;

namespace {

std::string epochs_approx(const Rational& e) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(4) << to_double(e);
  return os.str();
}

}  // namespace

std::vector<MilestoneReport> exposure_report(const TrainingPlan& plan,
                                             const Manifest& m,
                                             std::vector<std::int64_t> milestones) {
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] < 0 || milestones[i] > plan.total_tokens)
      fail(ErrorCode::DomainError,
           "milestone " + std::to_string(milestones[i]) +
               " outside [0, total_tokens]");
    if (i > 0 && milestones[i] <= milestones[i - 1])
      fail(ErrorCode::DomainError, "milestones must be strictly increasing");
  }
  if (milestones.empty() || milestones.back() != plan.total_tokens)
    milestones.push_back(plan.total_tokens);

  auto r1 = resolve_blend(plan.phase1.blend, m);
  auto r2 = resolve_blend(plan.phase2.blend, m);
  const std::int64_t b1 = plan.phase1.token_budget;

  std::vector<MilestoneReport> out;
  out.reserve(milestones.size());
  for (std::int64_t milestone : milestones) {
    MilestoneReport report;
    report.tokens = milestone;
    const std::int64_t t1 = std::min(milestone, b1);
    const std::int64_t t2 = milestone - t1;
    for (std::size_t i = 0; i < m.sources().size(); ++i) {
      const DataSource& src = m.sources()[i];
      Rational visits = r1.shares[i].weight * t1 + r2.shares[i].weight * t2;
      std::int64_t avail = m.available_tokens(src);
      SourceExposure exp;
      exp.source_id = src.id;
      exp.tokens_seen = floor_to_i64(visits);
      exp.epochs = avail > 0 ? visits / avail : Rational(0);
      report.sources.push_back(std::move(exp));
    }
    out.push_back(std::move(report));
  }
  return out;
}

EpochCaps default_epoch_caps() {
  EpochCaps caps;
  caps.caps["cc_high"] = 6;
  caps.caps["math"] = 8;
  caps.caps["task_data"] = 8;
  return caps;
}

std::vector<OverexposureWarning> overexposure_check(const TrainingPlan& plan,
                                                    const Manifest& m,
                                                    const EpochCaps& targets) {
  std::vector<OverexposureWarning> warnings;
  for (const auto& [key, cap] : targets.caps) {
    if (resolve_key(m, key).empty()) continue;  // domain absent from this manifest
    Rational e1 = key_epochs(plan.phase1.blend, key, plan.phase1.token_budget, m);
    Rational e2 = key_epochs(plan.phase2.blend, key, plan.phase2.token_budget, m);
    Rational worst = std::max(e1, e2);
    if (worst <= cap) continue;
    OverexposureWarning w;
    w.domain = key;
    w.cap = cap;
    w.phase1_epochs = e1;
    w.phase2_epochs = e2;
    w.total_epochs = e1 + e2;
    w.excess = worst - cap;
    warnings.push_back(std::move(w));
  }
  return warnings;
}

std::vector<HorizonRow> horizon_whatif(const TrainingPlan& plan,
                                       const Manifest& m,
                                       const std::vector<std::int64_t>& new_totals,
                                       const EpochCaps& caps) {
  std::vector<HorizonRow> rows;
  std::vector<std::string> keys;
  for (const auto& [key, w] : plan.phase1.blend.weights) keys.push_back(key);
  for (const auto& [key, w] : plan.phase2.blend.weights)
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      keys.push_back(key);
  std::sort(keys.begin(), keys.end());

  for (std::int64_t total : new_totals) {
    TrainingPlan scaled = compose_plan(plan.phase1.blend, plan.phase2.blend,
                                       total, plan.p2_fraction);
    scaled.manifest_ref = plan.manifest_ref;
    HorizonRow row;
    row.total_tokens = total;
    for (const auto& key : keys)
      row.domain_epochs[key] =
          key_epochs(scaled.phase1.blend, key, scaled.phase1.token_budget, m) +
          key_epochs(scaled.phase2.blend, key, scaled.phase2.token_budget, m);
    row.warnings = overexposure_check(scaled, m, caps);
    row.rescaled = rescale_for_horizon(plan, m, total, caps);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Json warning_to_json(const OverexposureWarning& w) {
  return Json{{"domain", w.domain},
              {"cap", to_fraction_string(w.cap)},
              {"phase1_epochs", epochs_approx(w.phase1_epochs)},
              {"phase2_epochs", epochs_approx(w.phase2_epochs)},
              {"total_epochs", epochs_approx(w.total_epochs)},
              {"excess", epochs_approx(w.excess)}};
}

}  // namespace

std::string reports_to_json_string(const std::vector<MilestoneReport>& reports,
                                   const std::vector<OverexposureWarning>& warnings) {
  Json j;
  Json ms = Json::array();
  for (const auto& report : reports) {
    Json sources = Json::array();
    for (const auto& exp : report.sources)
      sources.push_back(Json{{"id", exp.source_id},
                             {"tokens_seen", exp.tokens_seen},
                             {"epochs", to_fraction_string(exp.epochs)},
                             {"epochs_approx", epochs_approx(exp.epochs)}});
    ms.push_back(Json{{"tokens", report.tokens}, {"sources", std::move(sources)}});
  }
  j["milestones"] = std::move(ms);
  Json ws = Json::array();
  for (const auto& w : warnings) ws.push_back(warning_to_json(w));
  j["warnings"] = std::move(ws);
  return detail::dump_json(j);
}

std::string reports_to_text(const std::vector<MilestoneReport>& reports,
                            const std::vector<OverexposureWarning>& warnings) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  for (const auto& report : reports) {
    os << "milestone " << report.tokens << " tokens\n";
    std::size_t width = 8;
    for (const auto& exp : report.sources)
      width = std::max(width, exp.source_id.size());
    for (const auto& exp : report.sources)
      os << "  " << std::left << std::setw(static_cast<int>(width))
         << exp.source_id << "  tokens_seen " << std::right << std::setw(16)
         << exp.tokens_seen << "  epochs " << epochs_approx(exp.epochs) << "\n";
  }
  for (const auto& w : warnings)
    os << "warning: " << w.domain << " sees " << epochs_approx(w.total_epochs)
       << " epochs total (phase1 " << epochs_approx(w.phase1_epochs)
       << ", phase2 " << epochs_approx(w.phase2_epochs) << "), cap "
       << to_fraction_string(w.cap) << "\n";
  return os.str();
}

std::string reports_to_csv(const std::vector<MilestoneReport>& reports) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "milestone,source,tokens_seen,epochs\n";
  for (const auto& report : reports)
    for (const auto& exp : report.sources)
      os << report.tokens << ',' << exp.source_id << ',' << exp.tokens_seen
         << ',' << epochs_approx(exp.epochs) << "\n";
  return os.str();
}

}  // namespace blendplan
