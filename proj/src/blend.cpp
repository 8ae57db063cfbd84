#include "blendplan/blend.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace blendplan {

using detail::Json;

namespace {

constexpr const char* kCrawlKey = "web_crawl";

std::string canonical_key(const std::string& key) {
  std::string out;
  out.reserve(key.size());
  for (char c : key) {
    if (c == '-' || c == ' ') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::optional<QualityLabel> crawl_bucket_from_key(const std::string& canon) {
  for (QualityLabel q : {QualityLabel::High, QualityLabel::MediumHigh,
                         QualityLabel::Medium, QualityLabel::MediumLow,
                         QualityLabel::Low})
    if (canon == std::string("cc_") + quality_name(q)) return q;
  return std::nullopt;
}

std::optional<DomainCategory> category_from_key(const std::string& canon) {
  for (DomainCategory c :
       {DomainCategory::WebCrawl, DomainCategory::HighQuality,
        DomainCategory::MediumQuality, DomainCategory::Multilingual,
        DomainCategory::TaskData})
    if (canon == category_name(c)) return c;
  return std::nullopt;
}

std::int64_t group_available(const Manifest& m,
                             const std::vector<const DataSource*>& group) {
  std::int64_t total = 0;
  for (const DataSource* s : group) total += m.available_tokens(*s);
  return total;
}

bool is_crawl_group(const std::vector<const DataSource*>& group) {
  return !group.empty() &&
         std::all_of(group.begin(), group.end(), [](const DataSource* s) {
           return s->category == DomainCategory::WebCrawl;
         });
}

}  // namespace

Rational BlendSpec::weight_sum() const {
  Rational sum = 0;
  for (const auto& [key, w] : weights) sum += w;
  return sum;
}

std::vector<const DataSource*> resolve_key(const Manifest& m,
                                           const std::string& key) {
  if (const DataSource* s = m.find(key)) return {s};
  std::string canon = canonical_key(key);
  std::vector<const DataSource*> out;
  if (auto bucket = crawl_bucket_from_key(canon)) {
    for (const auto& s : m.sources())
      if (s.category == DomainCategory::WebCrawl && s.quality == *bucket)
        out.push_back(&s);
    return out;
  }
  if (auto category = category_from_key(canon)) {
    for (const auto& s : m.sources())
      if (s.category == *category) out.push_back(&s);
    return out;
  }
  for (const auto& s : m.sources())
    if (canonical_key(s.subdomain) == canon && !s.subdomain.empty())
      out.push_back(&s);
  return out;
}

BlendResolution resolve_blend(const BlendSpec& blend, const Manifest& m) {
  std::map<const DataSource*, Rational> weight_of;
  std::map<const DataSource*, std::string> claimed_by;
  for (const auto& [key, weight] : blend.weights) {
    auto group = resolve_key(m, key);
    if (group.empty())
      fail(ErrorCode::UnknownSource,
           "blend '" + blend.name + "': key '" + key +
               "' matches no source or domain group");
    std::int64_t avail = group_available(m, group);
    if (avail <= 0 && weight > 0)
      fail(ErrorCode::DomainError,
           "blend '" + blend.name + "': key '" + key +
               "' has no available tokens to carry weight");
    for (const DataSource* s : group) {
      auto [it, inserted] = claimed_by.emplace(s, key);
      if (!inserted)
        fail(ErrorCode::ValidationError,
             "blend '" + blend.name + "': source '" + s->id +
                 "' claimed by both '" + it->second + "' and '" + key + "'");
      Rational share = 0;
      if (avail > 0)
        share = weight * Rational(m.available_tokens(*s), avail);
      weight_of[s] = share;
    }
  }
  BlendResolution res;
  for (const auto& s : m.sources()) {
    auto it = weight_of.find(&s);
    res.shares.push_back({&s, it == weight_of.end() ? Rational(0) : it->second});
  }
  return res;
}

BlendSpec natural_distribution(const Manifest& m) {
  if (m.sources().empty())
    fail(ErrorCode::EmptyManifest, "natural distribution of an empty manifest");
  std::int64_t total = m.total_available();
  if (total <= 0)
    fail(ErrorCode::EmptyManifest,
         "natural distribution needs at least one available token");
  BlendSpec blend;
  blend.name = "natural";
  for (const auto& s : m.sources())
    blend.weights[s.id] = Rational(m.available_tokens(s), total);
  return blend;
}

std::map<std::string, Rational> epochs_seen(const BlendSpec& blend,
                                            std::int64_t budget,
                                            const Manifest& m) {
  if (budget < 0) fail(ErrorCode::DomainError, "budget must be non-negative");
  auto res = resolve_blend(blend, m);
  std::map<std::string, Rational> out;
  for (const auto& share : res.shares) {
    std::int64_t avail = m.available_tokens(*share.source);
    Rational visits = share.weight * budget;
    out[share.source->id] = avail > 0 ? visits / avail : Rational(0);
  }
  return out;
}

std::map<std::string, Rational> plan_epochs(const TrainingPlan& plan,
                                            const Manifest& m) {
  auto e1 = epochs_seen(plan.phase1.blend, plan.phase1.token_budget, m);
  auto e2 = epochs_seen(plan.phase2.blend, plan.phase2.token_budget, m);
  for (const auto& [id, e] : e2) e1[id] += e;
  return e1;
}

Rational key_epochs(const BlendSpec& blend, const std::string& key,
                    std::int64_t budget, const Manifest& m) {
  auto group = resolve_key(m, key);
  if (group.empty())
    fail(ErrorCode::UnknownDomain, "key '" + key + "' matches nothing");
  std::int64_t avail = group_available(m, group);
  if (avail <= 0) return 0;
  auto it = blend.weights.find(key);
  if (it != blend.weights.end()) return it->second * budget / avail;
  // Key not present verbatim: accumulate the group's visits from the
  // resolved per-source shares.
  auto res = resolve_blend(blend, m);
  std::set<const DataSource*> members(group.begin(), group.end());
  Rational visits = 0;
  for (const auto& share : res.shares)
    if (members.count(share.source)) visits += share.weight * budget;
  return visits / avail;
}

TrainingPlan compose_plan(BlendSpec p1, BlendSpec p2, std::int64_t total,
                          const Rational& p2_fraction) {
  if (total <= 0) fail(ErrorCode::DomainError, "total tokens must be positive");
  if (p2_fraction < 0 || p2_fraction >= 1)
    fail(ErrorCode::DomainError,
         "p2_fraction must lie in [0, 1), got " + to_fraction_string(p2_fraction));
  TrainingPlan plan;
  plan.total_tokens = total;
  plan.p2_fraction = p2_fraction;
  plan.phase2.token_budget = round_half_up_i64(p2_fraction * total);
  plan.phase1.token_budget = total - plan.phase2.token_budget;
  plan.phase1.blend = std::move(p1);
  plan.phase2.blend = std::move(p2);
  return plan;
}

BlendSpec target_epochs_blend(const BlendSpec& base, const std::string& domain,
                              const Rational& target_epochs,
                              std::int64_t budget, const Manifest& m) {
  if (budget <= 0) fail(ErrorCode::DomainError, "budget must be positive");
  if (target_epochs < 0)
    fail(ErrorCode::DomainError, "target epochs must be non-negative");
  auto group = resolve_key(m, domain);
  if (group.empty())
    fail(ErrorCode::UnknownDomain,
         "domain '" + domain + "' matches no source or group");
  std::int64_t avail = group_available(m, group);
  Rational w_new = target_epochs * avail / budget;
  if (w_new > 1)
    fail(ErrorCode::InfeasibleTarget,
         "domain '" + domain + "' would need weight " +
             to_fraction_string(w_new) + " > 1 for " +
             to_fraction_string(target_epochs) + " epochs");

  Rational w_old = 0;
  if (auto it = base.weights.find(domain); it != base.weights.end())
    w_old = it->second;

  // When the target is a crawl quality bucket, the delta stays inside web
  // crawl: only the other crawl-resolved keys rescale.
  bool crawl_bucket = crawl_bucket_from_key(canonical_key(domain)).has_value() ||
                      (is_crawl_group(group) &&
                       canonical_key(domain) != kCrawlKey);
  BlendSpec out = base;
  out.weights[domain] = w_new;

  Rational pool_old = 0;
  std::vector<std::string> pool_keys;
  for (const auto& [key, w] : base.weights) {
    if (key == domain) continue;
    if (crawl_bucket && !is_crawl_group(resolve_key(m, key))) continue;
    pool_keys.push_back(key);
    pool_old += w;
  }
  Rational pool_new = pool_old - (w_new - w_old);
  if (pool_old == 0) {
    if (w_new != w_old)
      fail(ErrorCode::InfeasibleTarget,
           "no other weights available to absorb the change for '" + domain +
               "'");
    return out;
  }
  if (pool_new < 0)
    fail(ErrorCode::InfeasibleTarget,
         "rescaling '" + domain + "' would drive other weights negative");
  Rational factor = pool_new / pool_old;
  for (const auto& key : pool_keys) out.weights[key] *= factor;
  return out;
}

TrainingPlan rescale_for_horizon(const TrainingPlan& plan, const Manifest& m,
                                 std::int64_t new_total, const EpochCaps& caps) {
  if (new_total <= 0)
    fail(ErrorCode::DomainError, "new total tokens must be positive");
  TrainingPlan out = plan;
  out.total_tokens = new_total;
  out.phase2.token_budget = round_half_up_i64(plan.p2_fraction * new_total);
  out.phase1.token_budget = new_total - out.phase2.token_budget;

  Rational s = round_decimal(Rational(plan.total_tokens) / new_total, 1);
  if (s >= 1) return out;  // shrinking or equal horizon: weights stay

  auto projected = [&](const std::string& key) {
    TrainingPlan probe = out;
    return key_epochs(probe.phase1.blend, key, probe.phase1.token_budget, m) +
           key_epochs(probe.phase2.blend, key, probe.phase2.token_budget, m);
  };

  Rational freed = 0;
  bool any_capped = false;
  for (const auto& [key, cap] : caps.caps) {
    if (cap <= 0)
      fail(ErrorCode::CapInfeasible, "cap for '" + key + "' must be positive");
    if (canonical_key(key) == kCrawlKey) continue;  // crawl absorbs, never caps
    auto it = out.phase2.blend.weights.find(key);
    if (it == out.phase2.blend.weights.end() || it->second == 0) continue;
    if (projected(key) <= cap) continue;
    any_capped = true;
    Rational w_old = it->second;
    Rational w_new = round_decimal(w_old * s, 3);  // 0.1 percent granularity
    freed += w_old - w_new;
    it->second = w_new;
  }
  if (!any_capped) return out;

  auto& weights = out.phase2.blend.weights;
  auto crawl_it = weights.find(kCrawlKey);
  if (crawl_it == weights.end()) {
    // Fall back to a unique crawl-resolved key (e.g. a High-only phase-2
    // blend keyed by cc_high).
    std::string found;
    for (const auto& [key, w] : weights)
      if (is_crawl_group(resolve_key(m, key))) {
        if (!found.empty())
          fail(ErrorCode::MissingCrawlKey,
               "phase-2 blend has several crawl keys; cannot route freed mass");
        found = key;
      }
    if (found.empty())
      fail(ErrorCode::MissingCrawlKey,
           "phase-2 blend has no web crawl key to absorb freed mass");
    crawl_it = weights.find(found);
  }
  crawl_it->second += freed;
  return out;
}

std::vector<Diagnostic> validate_blend(const BlendSpec& blend) {
  std::vector<Diagnostic> diags;
  if (blend.weights.empty()) {
    diags.push_back({"EmptyBlend", blend.name, "blend has no weights"});
    return diags;
  }
  for (const auto& [key, w] : blend.weights)
    if (w < 0)
      diags.push_back({"NegativeWeight", key,
                       "weight " + weight_to_string(w) + " is negative"});
  Rational sum = blend.weight_sum();
  Rational err = sum - 1;
  if (err < 0) err = -err;
  if (err > Rational(1, 1000000000))
    diags.push_back({"SumMismatch", blend.name,
                     "weights sum to " + weight_to_string(sum) +
                         " percent-wise, expected 100"});
  return diags;
}

std::vector<Diagnostic> validate_blend(const BlendSpec& blend,
                                       const Manifest& m) {
  auto diags = validate_blend(blend);
  std::map<const DataSource*, std::string> claimed_by;
  for (const auto& [key, w] : blend.weights) {
    auto group = resolve_key(m, key);
    if (group.empty()) {
      diags.push_back({"UnknownKey", key,
                       "key matches no source or domain group in the manifest"});
      continue;
    }
    for (const DataSource* s : group) {
      auto [it, inserted] = claimed_by.emplace(s, key);
      if (!inserted)
        diags.push_back({"OverlappingKeys", key,
                         "source '" + s->id + "' already claimed by '" +
                             it->second + "'"});
    }
  }
  return diags;
}

namespace {

BlendSpec blend_from_json(const Json& j) {
  BlendSpec blend;
  if (j.contains("name")) blend.name = j.at("name").get<std::string>();
  const Json& weights = detail::require(j, "weights", "blend " + blend.name);
  if (!weights.is_object())
    fail(ErrorCode::ParseError, "blend " + blend.name + ": weights must be an object");
  for (const auto& [key, value] : weights.items()) {
    if (!value.is_string())
      fail(ErrorCode::ParseError,
           "blend " + blend.name + ": weight '" + key + "' must be a string");
    blend.weights[key] = parse_weight(value.get<std::string>());
  }
  if (j.contains("recommended_budget"))
    blend.recommended_budget = j.at("recommended_budget").get<std::int64_t>();
  return blend;
}

Json blend_to_json(const BlendSpec& blend) {
  Json j;
  j["name"] = blend.name;
  Json w = Json::object();
  for (const auto& [key, weight] : blend.weights)
    w[key] = weight_to_string(weight);
  j["weights"] = std::move(w);
  if (blend.recommended_budget) j["recommended_budget"] = *blend.recommended_budget;
  return j;
}

TrainingPlan plan_from_json(const Json& j) {
  TrainingPlan plan;
  plan.total_tokens = detail::require_int(j, "total_tokens", "plan");
  plan.p2_fraction =
      parse_rational(detail::require_string(j, "p2_fraction", "plan"));
  const Json& p1 = detail::require(j, "phase1", "plan");
  const Json& p2 = detail::require(j, "phase2", "plan");
  plan.phase1.blend = blend_from_json(detail::require(p1, "blend", "phase1"));
  plan.phase1.token_budget = detail::require_int(p1, "token_budget", "phase1");
  plan.phase2.blend = blend_from_json(detail::require(p2, "blend", "phase2"));
  plan.phase2.token_budget = detail::require_int(p2, "token_budget", "phase2");
  if (j.contains("manifest_ref")) {
    const Json& r = j.at("manifest_ref");
    if (r.contains("path")) plan.manifest_ref.path = r.at("path").get<std::string>();
    if (r.contains("fingerprint"))
      plan.manifest_ref.fingerprint = r.at("fingerprint").get<std::string>();
  }
  if (plan.phase1.token_budget + plan.phase2.token_budget != plan.total_tokens)
    fail(ErrorCode::ValidationError,
         "plan: phase budgets do not sum to total_tokens");
  if (plan.phase2.token_budget !=
      round_half_up_i64(plan.p2_fraction * plan.total_tokens))
    fail(ErrorCode::ValidationError,
         "plan: phase2 budget does not match p2_fraction");
  return plan;
}

Json plan_to_json(const TrainingPlan& plan) {
  Json j;
  j["total_tokens"] = plan.total_tokens;
  j["p2_fraction"] = to_fraction_string(plan.p2_fraction);
  j["phase1"] = Json{{"blend", blend_to_json(plan.phase1.blend)},
                     {"token_budget", plan.phase1.token_budget}};
  j["phase2"] = Json{{"blend", blend_to_json(plan.phase2.blend)},
                     {"token_budget", plan.phase2.token_budget}};
  if (!plan.manifest_ref.empty())
    j["manifest_ref"] = Json{{"path", plan.manifest_ref.path},
                             {"fingerprint", plan.manifest_ref.fingerprint}};
  return j;
}

std::string slurp(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ParseError,
         std::string("cannot open ") + what + " file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::string& text, const std::filesystem::path& path,
           const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::ParseError,
         std::string("cannot write ") + what + " file " + path.string());
  out << text;
}

}  // namespace

BlendSpec blend_from_json_string(const std::string& text) {
  return blend_from_json(detail::parse_json(text, "blend"));
}

std::string blend_to_json_string(const BlendSpec& blend) {
  return detail::dump_json(blend_to_json(blend));
}

BlendSpec load_blend(const std::filesystem::path& path) {
  return blend_from_json_string(slurp(path, "blend"));
}

void save_blend(const BlendSpec& blend, const std::filesystem::path& path) {
  spill(blend_to_json_string(blend), path, "blend");
}

TrainingPlan plan_from_json_string(const std::string& text) {
  return plan_from_json(detail::parse_json(text, "plan"));
}

std::string plan_to_json_string(const TrainingPlan& plan) {
  return detail::dump_json(plan_to_json(plan));
}

TrainingPlan load_plan(const std::filesystem::path& path) {
  return plan_from_json_string(slurp(path, "plan"));
}

void save_plan(const TrainingPlan& plan, const std::filesystem::path& path) {
  spill(plan_to_json_string(plan), path, "plan");
}

EpochCaps caps_from_json_string(const std::string& text) {
  Json j = detail::parse_json(text, "caps");
  const Json& caps = detail::require(j, "caps", "caps");
  EpochCaps out;
  for (const auto& [key, value] : caps.items()) {
    if (value.is_string())
      out.caps[key] = parse_rational(value.get<std::string>());
    else if (value.is_number_integer())
      out.caps[key] = Rational(value.get<std::int64_t>());
    else
      fail(ErrorCode::ParseError, "caps: value for '" + key +
                                      "' must be an integer or a rational string");
  }
  return out;
}

std::string caps_to_json_string(const EpochCaps& caps) {
  Json inner = Json::object();
  for (const auto& [key, value] : caps.caps)
    inner[key] = to_fraction_string(value);
  Json j;
  j["caps"] = std::move(inner);
  return detail::dump_json(j);
}

EpochCaps load_caps(const std::filesystem::path& path) {
  return caps_from_json_string(slurp(path, "caps"));
}

}  // namespace blendplan
