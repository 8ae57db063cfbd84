#pragma once

#include <iosfwd>

namespace blendplan::cli {

/// Entry point behind the `blendplan` binary. Returns 0 on success, 1 when
/// validation diagnostics were emitted, 2 on usage errors. Diagnostics go to
/// `err` as one JSON object per line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace blendplan::cli
