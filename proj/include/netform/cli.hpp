#pragma once

#include <iosfwd>

namespace netform {

/// The netform command line. Returns the process exit code: 0 on success,
/// the ErrorCategory value for library errors, 1 for anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netform
