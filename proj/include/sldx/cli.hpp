#pragma once

// `sldx` command-line front end. Exit codes: 0 ok, 1 domain failure,
// 2 malformed input or usage, 3 batch degraded (more than half the requests failed).

#include <ostream>
#include <string>
#include <vector>

#include "sldx/error.hpp"

namespace sldx {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitDegraded = 3;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int exit_code_for(ErrorCode code);

}  // namespace sldx
