#pragma once

#include <iosfwd>

namespace ksapprox::cli {

/// Entry point of the ksapprox command-line tool. Returns the exit code.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ksapprox::cli
