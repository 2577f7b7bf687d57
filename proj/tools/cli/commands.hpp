#pragma once

#include <iosfwd>

namespace zgs::cli {

/// Entry point of the `zgs` tool. Exit status: 0 success, 1 usage or
/// configuration error, 2 data or integrity error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zgs::cli
