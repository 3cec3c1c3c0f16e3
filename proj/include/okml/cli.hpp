#pragma once

#include <iosfwd>

namespace okml {

/// Entry point behind the `okml` binary. Subcommands: run, synth, qp,
/// compare. Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace okml
