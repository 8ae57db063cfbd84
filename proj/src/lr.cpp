#include "blendplan/lr.hpp"

#include "blendplan/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace blendplan {

namespace {

// Fraction of the decay remaining at progress x in [0, 1]; 1 at the start,
// exactly 0 at the end.
double decay_bracket(DecayKind kind, double x) {
  if (kind == DecayKind::Cosine) return 0.5 * (1.0 + std::cos(M_PI * x));
  return 1.0 - x;
}

}  // namespace

const char* decay_name(DecayKind kind) {
  return kind == DecayKind::Cosine ? "cosine" : "linear";
}

DecayKind decay_from_name(const std::string& name) {
  if (name == "cosine") return DecayKind::Cosine;
  if (name == "linear") return DecayKind::Linear;
  fail(ErrorCode::ParseError, "unknown decay kind '" + name + "'");
}

void LRConfig::validate() const {
  if (!(lr_min >= 0) || !(lr_min <= lr_max))
    fail(ErrorCode::DomainError, "need 0 <= lr_min <= lr_max");
  if (total_tokens <= 0)
    fail(ErrorCode::DomainError, "total_tokens must be positive");
  if (phase1_tokens <= 0 || phase1_tokens > total_tokens)
    fail(ErrorCode::DomainError, "need 0 < phase1_tokens <= total_tokens");
}

double lr_at(const LRConfig& config, std::int64_t tokens) {
  config.validate();
  if (tokens < 0 || tokens > config.total_tokens)
    fail(ErrorCode::DomainError, "tokens outside [0, total_tokens]");
  const double span = config.lr_max - config.lr_min;
  if (tokens <= config.phase1_tokens) {
    double x = static_cast<double>(tokens) / static_cast<double>(config.total_tokens);
    return config.lr_min + span * decay_bracket(config.decay, x);
  }
  const double boundary = phase_boundary_lr(config);
  double x = static_cast<double>(tokens - config.phase1_tokens) /
             static_cast<double>(config.total_tokens - config.phase1_tokens);
  return config.lr_min + (boundary - config.lr_min) * decay_bracket(config.decay, x);
}

double phase_boundary_lr(const LRConfig& config) {
  config.validate();
  double x = static_cast<double>(config.phase1_tokens) /
             static_cast<double>(config.total_tokens);
  return config.lr_min +
         (config.lr_max - config.lr_min) * decay_bracket(config.decay, x);
}

void write_lr_csv(const LRConfig& config, std::int64_t stride,
                  std::ostream& out) {
  config.validate();
  if (stride <= 0) fail(ErrorCode::DomainError, "stride must be positive");
  out << "tokens,lr\n";
  char buf[40];
  auto emit = [&](std::int64_t t) {
    std::snprintf(buf, sizeof buf, "%.12g", lr_at(config, t));
    out << t << ',' << buf << '\n';
  };
  for (std::int64_t t = 0; t < config.total_tokens; t += stride) emit(t);
  emit(config.total_tokens);
}

}  // namespace blendplan
