#pragma once

// Config-driven command line: verify | simulate | describe | sample.
//
// Exit codes: 0 success, 1 failed checks or a runtime error, 2 a malformed
// command line or config.

#include <ostream>

namespace eifkit {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eifkit
