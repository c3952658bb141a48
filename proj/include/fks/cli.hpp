#pragma once

#include <iosfwd>

namespace fks {

/// Entry point of the fks tool: subcommands tau, gamma, converge, compare.
/// Returns 0 on success, 2 on configuration errors and 1 on runtime errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fks
