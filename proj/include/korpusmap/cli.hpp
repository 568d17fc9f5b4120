#pragma once

#include <iosfwd>

namespace korpusmap::cli {

/// Entry point of the korpusmap tool. Returns 0 on success, 1 on a pipeline
/// error (reported as one `korpusmap: error: <command>: <message>` line on
/// `err`), and 2 on a command-line usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace korpusmap::cli
