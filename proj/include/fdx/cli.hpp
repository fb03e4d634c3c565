#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdx::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

/// Runs the command line `args` (without the program name). Results go to
/// `out` unless an --out path is given; diagnostics and progress go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `a:b:step` into a, a + step, ... up to b inclusive. a > b yields an
/// empty grid; every point must lie in (0,1).
std::vector<double> parse_zeta_grid(const std::string& text);

}  // namespace fdx::cli
