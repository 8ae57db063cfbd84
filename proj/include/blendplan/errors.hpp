#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace blendplan {

enum class ErrorCode {
  ParseError,
  ValidationError,
  DomainError,
  EmptyManifest,
  UnknownSource,
  UnknownDomain,
  UnknownPreset,
  InfeasibleTarget,
  CapInfeasible,
  MissingCrawlKey,
  EmptyShardList,
  BudgetOverflow,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

/// A structured validation finding. `code` is a stable machine-readable
/// identifier (e.g. "SumMismatch"), `subject` names the offending key or
/// source, `detail` is human-readable.
struct Diagnostic {
  std::string code;
  std::string subject;
  std::string detail;

  bool operator==(const Diagnostic&) const = default;
};

/// Throws ValidationError with a joined message when `diags` is nonempty.
void throw_if_diagnostics(const std::vector<Diagnostic>& diags,
                          const std::string& context);

}  // namespace blendplan
