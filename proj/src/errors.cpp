#include "blendplan/errors.hpp"

namespace blendplan {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::CapInfeasible: return "CapInfeasible";
    case ErrorCode::MissingCrawlKey: return "MissingCrawlKey";
    case ErrorCode::EmptyShardList: return "EmptyShardList";
    case ErrorCode::BudgetOverflow: return "BudgetOverflow";
  }
  return "Error";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

void throw_if_diagnostics(const std::vector<Diagnostic>& diags,
                          const std::string& context) {
  if (diags.empty()) return;
  std::string msg = context + ":";
  for (const auto& d : diags) {
    msg += " [" + d.code;
    if (!d.subject.empty()) msg += " " + d.subject;
    msg += "] " + d.detail + ";";
  }
  throw Error(ErrorCode::ValidationError, msg);
}

}  // namespace blendplan
