#include "blendplan/cli.hpp"

#include "blendplan/catalog.hpp"
#include "blendplan/lr.hpp"
#include "blendplan/manifest.hpp"
#include "blendplan/schedule.hpp"
#include "blendplan/simulate.hpp"
#include "json_util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace blendplan::cli {

namespace {

using detail::Json;

constexpr int kOk = 0;
constexpr int kDiagnostics = 1;
constexpr int kUsage = 2;

void emit_diag(std::ostream& err, const Diagnostic& d) {
  Json j{{"code", d.code}, {"subject", d.subject}, {"detail", d.detail}};
  err << j.dump() << "\n";
}

void emit_error(std::ostream& err, const Error& e) {
  Json j{{"code", error_code_name(e.code())}, {"detail", e.what()}};
  err << j.dump() << "\n";
}

int emit_diags(std::ostream& err, const std::vector<Diagnostic>& diags) {
  bool any = false;
  for (const auto& d : diags) {
    emit_diag(err, d);
    any = true;
  }
  return any ? kDiagnostics : kOk;
}

void write_output(const std::string& text, const std::string& path,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::ParseError, "cannot write output file " + path);
  file << text;
}

/// Blend argument: a catalog preset name or a path to a blend JSON file.
BlendSpec blend_from_arg(const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_blend(arg);
  Catalog catalog = active_catalog();
  if (const BlendSpec* preset = catalog.find_blend(arg)) return *preset;
  fail(ErrorCode::UnknownPreset,
       "'" + arg + "' is neither a blend file nor a catalog preset");
}

Manifest manifest_for_plan(const TrainingPlan& plan,
                           const std::string& manifest_path, std::ostream& err) {
  std::string path = manifest_path;
  if (path.empty()) path = plan.manifest_ref.path;
  if (path.empty())
    fail(ErrorCode::ParseError,
         "no manifest given and the plan carries no manifest path");
  Manifest m = load_manifest(path);
  if (!plan.manifest_ref.fingerprint.empty() &&
      manifest_fingerprint(m) != plan.manifest_ref.fingerprint)
    emit_diag(err, {"ManifestFingerprintMismatch", path,
                    "manifest content differs from the one the plan was "
                    "composed against"});
  return m;
}

struct PlanArgs {
  std::string manifest;
  std::string p1;
  std::string p2;
  std::string total;
  std::string p2_fraction = "0.4";
  std::string output;
};

int cmd_plan(const PlanArgs& args, std::ostream& out, std::ostream& err) {
  Manifest m = load_manifest(args.manifest);
  BlendSpec p1 = blend_from_arg(args.p1);
  BlendSpec p2 = blend_from_arg(args.p2);
  std::vector<Diagnostic> diags = validate_blend(p1, m);
  for (auto& d : validate_blend(p2, m)) diags.push_back(std::move(d));
  if (int rc = emit_diags(err, diags); rc != kOk) return rc;

  TrainingPlan plan =
      compose_plan(std::move(p1), std::move(p2), parse_token_count(args.total),
                   parse_rational(args.p2_fraction));
  plan.manifest_ref = {args.manifest, manifest_fingerprint(m)};
  write_output(plan_to_json_string(plan), args.output, out);
  return kOk;
}

struct ValidateArgs {
  std::string blend;
  std::string manifest;
};

int cmd_validate(const ValidateArgs& args, std::ostream&, std::ostream& err) {
  std::vector<Diagnostic> diags;
  std::optional<Manifest> manifest;
  if (!args.manifest.empty()) {
    Manifest m = manifest_from_json_string([&] {
      std::ifstream in(args.manifest);
      if (!in)
        fail(ErrorCode::ParseError, "cannot open manifest file " + args.manifest);
      std::stringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }());
    for (auto& d : m.validate()) diags.push_back(std::move(d));
    manifest = std::move(m);
  }
  if (!args.blend.empty()) {
    BlendSpec blend = load_blend(args.blend);
    auto blend_diags = manifest && diags.empty()
                           ? validate_blend(blend, *manifest)
                           : validate_blend(blend);
    for (auto& d : blend_diags) diags.push_back(std::move(d));
  }
  return emit_diags(err, diags);
}

struct ScheduleArgs {
  std::string plan;
  std::string manifest;
  std::uint64_t seed = 0;
  std::string quantum = std::to_string(kDefaultQuantumTokens);
  std::string ordering = "two-phase";
  int workers = 1;
  int worker = -1;
  std::string limit;
  std::string format = "tsv";
  std::string output;
};

int cmd_schedule(const ScheduleArgs& args, std::ostream& out, std::ostream& err) {
  TrainingPlan plan = load_plan(args.plan);
  Manifest m = manifest_for_plan(plan, args.manifest, err);
  ScheduleConfig config;
  config.seed = args.seed;
  config.quantum = parse_token_count(args.quantum);
  config.ordering = ordering_from_name(args.ordering);
  config.workers = args.workers;
  std::optional<std::int64_t> limit;
  if (!args.limit.empty()) limit = parse_token_count(args.limit);

  ScheduleStream stream(plan, m, config);
  std::ostringstream body(std::ios::binary);
  body.imbue(std::locale::classic());
  auto emit = [&](auto& s) {
    if (args.format == "tsv")
      write_schedule_tsv(s, body, limit);
    else if (args.format == "binary")
      write_schedule_binary(s, m, body, limit);
    else
      fail(ErrorCode::ParseError,
           "schedule format must be 'tsv' or 'binary', got '" + args.format + "'");
  };
  if (args.worker >= 0) {
    PartitionedStream part =
        partition_for_worker(std::move(stream), args.worker, config.workers);
    emit(part);
  } else {
    emit(stream);
  }
  write_output(body.str(), args.output, out);
  return kOk;
}

struct SimulateArgs {
  std::string plan;
  std::string manifest;
  std::string milestones;
  std::string caps;
  std::string format = "text";
  std::string output;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  TrainingPlan plan = load_plan(args.plan);
  Manifest m = manifest_for_plan(plan, args.manifest, err);
  std::vector<std::int64_t> milestones;
  if (!args.milestones.empty()) {
    std::stringstream ss(args.milestones);
    std::string part;
    while (std::getline(ss, part, ',')) milestones.push_back(parse_token_count(part));
  } else {
    for (int quarter = 1; quarter <= 4; ++quarter) {
      std::int64_t at = plan.total_tokens / 4 * quarter;
      if (at > 0 && (milestones.empty() || at > milestones.back()))
        milestones.push_back(at);
    }
  }
  EpochCaps caps = args.caps.empty() ? default_epoch_caps() : load_caps(args.caps);

  auto reports = exposure_report(plan, m, std::move(milestones));
  auto warnings = overexposure_check(plan, m, caps);
  std::string text;
  if (args.format == "json")
    text = reports_to_json_string(reports, warnings);
  else if (args.format == "text")
    text = reports_to_text(reports, warnings);
  else if (args.format == "csv")
    text = reports_to_csv(reports);
  else
    fail(ErrorCode::ParseError,
         "simulate format must be json, text or csv, got '" + args.format + "'");
  write_output(text, args.output, out);
  return kOk;
}

struct ScaleArgs {
  std::string plan;
  std::string manifest;
  std::string total;
  std::string caps;
  std::string output;
};

int cmd_scale(const ScaleArgs& args, std::ostream& out, std::ostream& err) {
  TrainingPlan plan = load_plan(args.plan);
  Manifest m = manifest_for_plan(plan, args.manifest, err);
  EpochCaps caps = args.caps.empty() ? default_epoch_caps() : load_caps(args.caps);
  TrainingPlan scaled =
      rescale_for_horizon(plan, m, parse_token_count(args.total), caps);
  write_output(plan_to_json_string(scaled), args.output, out);
  return kOk;
}

struct LrArgs {
  std::string plan;
  std::string total;
  std::string p1_tokens;
  double lr_max = 3e-4;
  double lr_min = 3e-6;
  std::string decay = "cosine";
  std::string stride;
  std::string output;
};

int cmd_lr(const LrArgs& args, std::ostream& out, std::ostream&) {
  LRConfig config;
  config.lr_max = args.lr_max;
  config.lr_min = args.lr_min;
  config.decay = decay_from_name(args.decay);
  if (!args.plan.empty()) {
    TrainingPlan plan = load_plan(args.plan);
    config.total_tokens = plan.total_tokens;
    config.phase1_tokens = plan.phase1.token_budget;
  } else {
    if (args.total.empty() || args.p1_tokens.empty())
      fail(ErrorCode::ParseError, "lr needs --plan or both --total and --p1-tokens");
    config.total_tokens = parse_token_count(args.total);
    config.phase1_tokens = parse_token_count(args.p1_tokens);
  }
  std::int64_t stride = args.stride.empty()
                            ? std::max<std::int64_t>(config.total_tokens / 100, 1)
                            : parse_token_count(args.stride);
  std::ostringstream body;
  body.imbue(std::locale::classic());
  write_lr_csv(config, stride, body);
  write_output(body.str(), args.output, out);
  return kOk;
}

struct PresetsArgs {
  std::string format = "text";
};

int cmd_presets(const PresetsArgs& args, std::ostream& out, std::ostream& err) {
  Catalog catalog = active_catalog();
  if (args.format == "json") {
    out << catalog_to_json_string(catalog);
  } else {
    for (const auto& blend : catalog.blends) {
      auto diags = validate_blend(blend);
      out << blend.name << "\tdomain\t" << (diags.empty() ? "ok" : "invalid")
          << "\n";
      emit_diags(err, diags);
    }
    for (const auto& blend : catalog.crawl_blends) {
      bool ok = blend.weight_sum() == 1;
      out << blend.name << "\tcrawl\t" << (ok ? "ok" : "invalid") << "\n";
      if (!ok)
        emit_diag(err, {"SumMismatch", blend.name,
                        "crawl bucket weights sum to " +
                            weight_to_string(blend.weight_sum())});
    }
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"planner and scheduler for two-phase pretraining data blends"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "compose a two-phase training plan");
  plan->add_option("--manifest", plan_args.manifest)->required();
  plan->add_option("--p1", plan_args.p1, "phase-1 blend preset or file")->required();
  plan->add_option("--p2", plan_args.p2, "phase-2 blend preset or file")->required();
  plan->add_option("--total", plan_args.total, "total tokens, e.g. 1T")->required();
  plan->add_option("--p2-fraction", plan_args.p2_fraction);
  plan->add_option("-o,--output", plan_args.output);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "validate blends and manifests");
  validate->add_option("--blend", validate_args.blend);
  validate->add_option("--manifest", validate_args.manifest);

  ScheduleArgs schedule_args;
  auto* schedule = app.add_subcommand("schedule", "emit a deterministic token stream");
  schedule->add_option("--plan", schedule_args.plan)->required();
  schedule->add_option("--manifest", schedule_args.manifest);
  schedule->add_option("--seed", schedule_args.seed);
  schedule->add_option("--quantum", schedule_args.quantum);
  schedule->add_option("--ordering", schedule_args.ordering)
      ->check(CLI::IsMember({"two-phase", "two_phase", "random"}));
  schedule->add_option("--workers", schedule_args.workers);
  schedule->add_option("--worker", schedule_args.worker);
  schedule->add_option("--limit", schedule_args.limit, "emit at most N items");
  schedule->add_option("--format", schedule_args.format)
      ->check(CLI::IsMember({"tsv", "binary"}));
  schedule->add_option("-o,--output", schedule_args.output);

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "exposure reports and warnings");
  simulate->add_option("--plan", simulate_args.plan)->required();
  simulate->add_option("--manifest", simulate_args.manifest);
  simulate->add_option("--milestones", simulate_args.milestones,
                       "comma-separated token milestones");
  simulate->add_option("--caps", simulate_args.caps, "epoch caps JSON file");
  simulate->add_option("--format", simulate_args.format)
      ->check(CLI::IsMember({"json", "text", "csv"}));
  simulate->add_option("-o,--output", simulate_args.output);

  ScaleArgs scale_args;
  auto* scale = app.add_subcommand("scale", "rescale a plan to a new horizon");
  scale->add_option("--plan", scale_args.plan)->required();
  scale->add_option("--manifest", scale_args.manifest);
  scale->add_option("--total", scale_args.total)->required();
  scale->add_option("--caps", scale_args.caps);
  scale->add_option("-o,--output", scale_args.output);

  LrArgs lr_args;
  auto* lr = app.add_subcommand("lr", "sample the learning-rate schedule as CSV");
  lr->add_option("--plan", lr_args.plan);
  lr->add_option("--total", lr_args.total);
  lr->add_option("--p1-tokens", lr_args.p1_tokens);
  lr->add_option("--lr-max", lr_args.lr_max);
  lr->add_option("--lr-min", lr_args.lr_min);
  lr->add_option("--decay", lr_args.decay)
      ->check(CLI::IsMember({"cosine", "linear"}));
  lr->add_option("--stride", lr_args.stride);
  lr->add_option("-o,--output", lr_args.output);

  PresetsArgs presets_args;
  auto* presets = app.add_subcommand("presets", "list the blend catalog");
  presets->add_option("--format", presets_args.format)
      ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    if (plan->parsed()) return cmd_plan(plan_args, out, err);
    if (validate->parsed()) return cmd_validate(validate_args, out, err);
    if (schedule->parsed()) return cmd_schedule(schedule_args, out, err);
    if (simulate->parsed()) return cmd_simulate(simulate_args, out, err);
    if (scale->parsed()) return cmd_scale(scale_args, out, err);
    if (lr->parsed()) return cmd_lr(lr_args, out, err);
    if (presets->parsed()) return cmd_presets(presets_args, out, err);
  } catch (const Error& e) {
    emit_error(err, e);
    return kDiagnostics;
  }
  return kUsage;
}

}  // namespace blendplan::cli
