#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace strongcorr::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kInputError = 2,
};

/// Runs one command. `args` excludes the program name. Data goes to `out`
/// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace strongcorr::cli
