#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlv {

/// Command-line front end.  `args` excludes the program name; the report
/// goes to `out` (deterministic for fixed inputs and flags) and messages
/// plus timing go to `err`.
///
/// Exit codes: 0 success, 2 malformed input, 3 enumeration cap or search
/// budget exceeded, 4 search failure (disconnected walk graph, exhausted
/// candidate set), 5 audit failure (independent recomputation disagreed).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlv
