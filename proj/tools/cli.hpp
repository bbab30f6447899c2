#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace strata::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Runs the command line (arguments without the program name). CSV goes to
// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Formats a double with 17 significant digits.
std::string format_number(double v);

}  // namespace strata::cli
