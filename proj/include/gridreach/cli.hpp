#ifndef GRIDREACH_CLI_HPP
#define GRIDREACH_CLI_HPP

namespace gridreach::cli {

// Batch front end.  Subcommands: forward, backward, simulate, gen, maps.
// Returns 0 when the run verified safety (or the task simply succeeded),
// 1 when the result is unsafe/inconclusive, and 2 on configuration or
// analysis errors.  Exposed as a function so tests can drive it in-process.
int run(int argc, const char* const* argv);

}  // namespace gridreach::cli

#endif
