#pragma once

#include <ostream>

namespace polylab::cli {

/// Entry point of the polylab command. 0 on success, 2 on usage errors, 1 on
/// runtime failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polylab::cli
