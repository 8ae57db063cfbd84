#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace blendplan {

enum class DecayKind { Cosine, Linear };

const char* decay_name(DecayKind kind);
DecayKind decay_from_name(const std::string& name);

/// Two-phase learning-rate schedule over token counts. Phase 1 anneals from
/// lr_max toward lr_min with the decay shape spanning the FULL horizon, so
/// the phase-1 curve alone would only reach lr_min at total_tokens. Phase 2
/// restarts the shape from the intermediate LR reached at the boundary and
/// anneals it to lr_min at total_tokens.
struct LRConfig {
  double lr_max = 3e-4;
  double lr_min = 3e-6;
  DecayKind decay = DecayKind::Cosine;
  std::int64_t total_tokens = 0;   // T
  std::int64_t phase1_tokens = 0;  // T1, 0 < T1 <= T

  void validate() const;  // throws DomainError
};

double lr_at(const LRConfig& config, std::int64_t tokens);

/// lr_at at the phase boundary: the LR phase 2 starts from.
double phase_boundary_lr(const LRConfig& config);

// Batch geometry used by the reference setup; callers convert steps to
// tokens as steps * batch * sequence length.
inline constexpr std::int64_t kDefaultGlobalBatchSize = 1536;
inline constexpr std::int64_t kDefaultSequenceLength = 4096;
inline constexpr std::int64_t kDefaultTokensPerStep =
    kDefaultGlobalBatchSize * kDefaultSequenceLength;

/// CSV rows `tokens,lr` from 0 to total_tokens at the given stride (the
/// final row is always total_tokens).
void write_lr_csv(const LRConfig& config, std::int64_t stride,
                  std::ostream& out);

}  // namespace blendplan
