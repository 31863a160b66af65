// Built-in invariant suite behind the `selfcheck` subcommand.
#pragma once

#include <filesystem>
#include <ostream>

namespace memsim {

// Runs every invariant, prints one pass/fail line each, writes
// selfcheck.csv into `outdir`. Returns true when all pass.
bool run_selfcheck(const std::filesystem::path& outdir, std::ostream& log);

}  // namespace memsim
