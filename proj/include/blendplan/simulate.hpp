#pragma once

#include "blendplan/blend.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace blendplan {

struct SourceExposure {
  std::string source_id;
  std::int64_t tokens_seen = 0;  // floor of the exact visit count
  Rational epochs;               // exact: visits / available
};

struct MilestoneReport {
  std::int64_t tokens = 0;
  std::vector<SourceExposure> sources;  // manifest order
};

/// Analytic exposure at each milestone, piecewise linear across the phase
/// boundary. Milestones must be non-negative, strictly increasing and at
/// most total_tokens; the final milestone is appended when missing so every
/// report ends at the full horizon.
std::vector<MilestoneReport> exposure_report(const TrainingPlan& plan,
                                             const Manifest& m,
                                             std::vector<std::int64_t> milestones);

struct OverexposureWarning {
  std::string domain;
  Rational cap;
  Rational phase1_epochs;
  Rational phase2_epochs;
  Rational total_epochs;
  Rational excess;  // worst single-phase epochs minus the cap
};

/// Recommended exposure targets: 6 epochs of high-quality crawl, 8 of math
/// and of task data.
EpochCaps default_epoch_caps();

/// One warning per capped domain whose exposure within either phase exceeds
/// its cap. Epoch recommendations are per-phase quantities (each domain's
/// heavy phase is where overfitting shows), so a long horizon that merely
/// accumulates across phases does not warn.
std::vector<OverexposureWarning> overexposure_check(const TrainingPlan& plan,
                                                    const Manifest& m,
                                                    const EpochCaps& targets);

struct HorizonRow {
  std::int64_t total_tokens = 0;
  std::map<std::string, Rational> domain_epochs;  // per blend key
  std::vector<OverexposureWarning> warnings;
  TrainingPlan rescaled;
};

/// What-if table over candidate horizons: per-domain epochs with the blend
/// unchanged, the warnings that would fire, and the auto-rescaled plan.
std::vector<HorizonRow> horizon_whatif(const TrainingPlan& plan,
                                       const Manifest& m,
                                       const std::vector<std::int64_t>& new_totals,
                                       const EpochCaps& caps);

std::string reports_to_json_string(const std::vector<MilestoneReport>& reports,
                                   const std::vector<OverexposureWarning>& warnings);
std::string reports_to_text(const std::vector<MilestoneReport>& reports,
                            const std::vector<OverexposureWarning>& warnings);
std::string reports_to_csv(const std::vector<MilestoneReport>& reports);

}  // namespace blendplan
