#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ekmonoid/core.hpp"

namespace ekmonoid::cli {

/// Exit statuses of the command line tool.
enum Exit : int { kOk = 0, kInvalidConfig = 2, kUnsupported = 3, kNumeric = 4 };

int exit_status(ErrorCode code);

/// Exact decimal or scientific integer ("1e7", "2.5e3", "100"); fractional
/// or negative values are rejected.
std::uint64_t parse_exact_integer(std::string_view text);

/// Custom weight sequence: header `B=<dec> alpha=<dec> k=<int>` followed by
/// `k<TAB>a_k` lines (a_k an integer or p/q). Blank lines and `#` comments
/// are skipped.
WeightSequence weights_file_parse(const std::string& path);

/// Significant digits used for printed decimals: EKMONOID_PRECISION, capped
/// at what the working precision actually carries.
int output_digits();

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// Runs one subcommand; args excludes the program name. Reports go to `out`,
/// a single `error: CODE: message` line goes to `err` on failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ekmonoid::cli
