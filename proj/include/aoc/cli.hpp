#pragma once

#include <iosfwd>

namespace aoc {

/// Entry point of the `aoc` tool. Returns 0 on success, 1 on a computation failure and
/// 2 on a usage or configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aoc
