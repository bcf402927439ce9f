#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bam::cli {

/// Exit codes of every subcommand.
enum Exit : int { Ok = 0, InputError = 1, IoError = 2, GoldenDivergence = 3 };

/// Runs one command line (without the program name). Diagnostics go to `err`;
/// outputs without a file path go to `out`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bam::cli
